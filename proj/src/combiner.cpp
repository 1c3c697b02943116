#include "macsplit/combiner.hpp"

#include <algorithm>
#include <numeric>

namespace macsplit {

CombinablePair find_combinable_pair(std::span<const NodeEntry> entries,
                                    double tol) {
  if (entries.size() < 2) {
    throw std::invalid_argument("find_combinable_pair: need at least two entries");
  }
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (entries[a].nis != entries[b].nis) return entries[a].nis < entries[b].nis;
    return entries[a].id < entries[b].id;
  });
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const NodeEntry& lo = entries[order[k]];
    const NodeEntry& hi = entries[order[k + 1]];
    const PairRelation rel =
        classify_pair(lo.power, lo.nis, hi.power, hi.nis, tol);
    if (rel != PairRelation::Discontinuous) {
      return {order[k], order[k + 1], rel};
    }
  }
  throw InternalError(
      "find_combinable_pair: no overlapping or contiguous adjacent pair; "
      "the allocation is not tight or the tolerance is too small");
}

NodeEntry combine(const NodeEntry& a, const NodeEntry& b) {
  if (a.members.empty() || b.members.empty()) {
    throw std::invalid_argument("combine: entries must have nonempty member sets");
  }
  NodeEntry out;
  out.power = a.power + b.power;
  out.rate = a.rate + b.rate;
  out.nis = nis_for_rate(out.rate, out.power);
  out.members.resize(a.members.size() + b.members.size());
  const auto end = std::merge(a.members.begin(), a.members.end(),
                              b.members.begin(), b.members.end(),
                              out.members.begin());
  if (std::adjacent_find(out.members.begin(), end) != end) {
    throw std::invalid_argument("combine: member sets must be disjoint");
  }
  return out;
}

CombinationTree build_combination_tree(const RateAllocation& ra, double tol) {
  MembershipVerdict verdict = polymatroid_membership(ra, tol);
  if (verdict.status != MembershipStatus::DominantFace) {
    throw NotTightError(
        verdict.status == MembershipStatus::Outside
            ? "build_combination_tree: rate tuple lies outside the capacity region"
            : "build_combination_tree: rate tuple is strictly inside the capacity "
              "region (not a base)",
        std::move(verdict));
  }

  const std::size_t n = ra.size();
  CombinationTree tree;
  tree.user_count = n;
  tree.noise = ra.noise;
  tree.nodes.reserve(2 * n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    TreeNode leaf;
    leaf.entry.id = static_cast<int>(k);
    leaf.entry.power = ra.powers[k];
    leaf.entry.rate = ra.rates[k];
    leaf.entry.nis = nis_for_rate(ra.rates[k], ra.powers[k]);
    leaf.entry.members = {static_cast<int>(k)};
    tree.nodes.push_back(std::move(leaf));
  }

  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);
  const double rate_scale = std::max(1.0, capacity(ra.total_power(), ra.noise));

  while (active.size() > 1) {
    std::vector<NodeEntry> entries;
    entries.reserve(active.size());
    for (int id : active) entries.push_back(tree.nodes[id].entry);
    const CombinablePair pick = find_combinable_pair(entries, tol);
    const int low_id = active[pick.low_index];
    const int high_id = active[pick.high_index];

    TreeNode merged;
    merged.entry = combine(tree.nodes[low_id].entry, tree.nodes[high_id].entry);
    merged.entry.id = static_cast<int>(tree.nodes.size());
    merged.child_low = low_id;
    merged.child_high = high_id;
    merged.relation = pick.relation;
    const int merged_id = merged.entry.id;
    tree.nodes.push_back(std::move(merged));
    tree.nodes[low_id].parent = merged_id;
    tree.nodes[high_id].parent = merged_id;
    tree.merge_order.push_back(merged_id);

    std::erase_if(active, [&](int id) { return id == low_id || id == high_id; });
    active.push_back(merged_id);

    // The reduced entry set must stay a base of its own capacity region.
    double power_sum = 0.0, rate_sum = 0.0;
    for (int id : active) {
      power_sum += tree.nodes[id].entry.power;
      rate_sum += tree.nodes[id].entry.rate;
    }
    if (!rel_close(rate_sum, capacity(power_sum, ra.noise), tol, rate_scale)) {
      throw InternalError(
          "build_combination_tree: intermediate allocation lost tightness");
    }
  }

  const TreeNode& root = tree.nodes[tree.root()];
  if (!rel_close(root.entry.nis, ra.noise, tol, ra.noise + ra.total_power())) {
    throw InternalError(
        "build_combination_tree: root NIS does not sit on the noise floor");
  }
  return tree;
}

}  // namespace macsplit
