#include "macsplit/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace macsplit {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string node_label(const NodeEntry& e) {
  return e.id >= 0 ? "node " + std::to_string(e.id + 1) : "node";
}

// Geometry of the split child's pieces at one point of a placement sweep.
struct SweepPoint {
  double eps = 0.0;        // fraction of the child's power in its upper piece
  double rho = 0.0;        // rate the child achieves at this placement
  double float_nis = kNan; // floating-piece position (float families only)
};

double affine(double a, double b, double t) { return a + t * (b - a); }

SweepPoint sweep_eval(FillPattern pattern, const Region& parent, double pj,
                      double t) {
  SweepPoint out;
  if (pattern == FillPattern::FloatPartner) {
    const Rect& r = parent[0];
    const double pi = r.power - pj;
    const double nu = affine(r.nis, r.top() - pi, t);  // partner position
    const double below = nu - r.nis;
    const double above = r.top() - (nu + pi);
    out.eps = above / pj;
    if (below > 0.0) out.rho += capacity(below, r.nis);
    if (above > 0.0) out.rho += capacity(above, nu + pi);
    return out;
  }

  const double p1 = parent.upper().power, d1 = parent.upper().nis;
  const double p2 = parent.lower().power, d2 = parent.lower().nis;
  const double t1 = p1 + d1, t2 = p2 + d2;
  switch (pattern) {
    case FillPattern::SplitOuter:
    case FillPattern::SplitInner: {
      const double e_lo = std::max(0.0, 1.0 - p2 / pj);
      const double e_hi = std::min(1.0, p1 / pj);
      const double e = affine(e_lo, e_hi, t);
      const double up = e * pj;
      const double dn = pj - up;
      out.eps = e;
      if (pattern == FillPattern::SplitOuter) {
        if (up > 0.0) out.rho += capacity(up, t1 - up);
        if (dn > 0.0) out.rho += capacity(dn, d2);
      } else {
        if (up > 0.0) out.rho += capacity(up, d1);
        if (dn > 0.0) out.rho += capacity(dn, t2 - dn);
      }
      return out;
    }
    case FillPattern::FillLowerFloatUpper: {
      const double fp = pj - p2;  // floats inside the upper rect
      const double nu = affine(d1, t1 - fp, t);
      out.eps = fp / pj;
      out.rho = capacity(p2, d2) + capacity(fp, nu);
      out.float_nis = nu;
      return out;
    }
    case FillPattern::FillUpperFloatLower: {
      const double fp = pj - p1;  // floats inside the lower rect
      const double nu = affine(d2, t2 - fp, t);
      out.eps = p1 / pj;
      out.rho = capacity(p1, d1) + capacity(fp, nu);
      out.float_nis = nu;
      return out;
    }
    default:
      throw std::invalid_argument("sweep_eval: unknown pattern");
  }
}

// Bisect the monotone placement -> rate map until the interval width is
// below 1e-14 (at most 200 iterations).
SweepPoint solve_sweep(FillPattern pattern, const Region& parent, double pj,
                       double rj, double tol) {
  const SweepPoint g0 = sweep_eval(pattern, parent, pj, 0.0);
  const SweepPoint g1 = sweep_eval(pattern, parent, pj, 1.0);
  const double lo = std::min(g0.rho, g1.rho);
  const double hi = std::max(g0.rho, g1.rho);
  const double slack = tol * std::max(1.0, hi);
  if (rj < lo - slack || rj > hi + slack) {
    throw NumericalError(
        "epsilon_bisection: target rate outside the achievable bracket of "
        "the placement family");
  }
  const double target = std::clamp(rj, lo, hi);
  double a = 0.0, b = 1.0;
  for (int iter = 0; iter < 200 && (b - a) > 1e-14; ++iter) {
    const double m = 0.5 * (a + b);
    const double rm = sweep_eval(pattern, parent, pj, m).rho;
    if ((rm - target) * (g0.rho - target) > 0.0) {
      a = m;
    } else {
      b = m;
    }
  }
  return sweep_eval(pattern, parent, pj, 0.5 * (a + b));
}

void check_children(const NodeEntry& low, const NodeEntry& high,
                    PairRelation relation, double total_power,
                    double total_rate, double tol) {
  if (relation == PairRelation::Discontinuous) {
    throw std::invalid_argument(
        "partition: children of a merge node cannot be discontinuous");
  }
  const double nis_scale = std::max(low.nis, 1.0);
  if (low.nis > high.nis + tol * nis_scale) {
    throw std::invalid_argument(
        "partition: low child must have the smaller NIS");
  }
  if (!rel_close(low.power + high.power, total_power, tol, total_power)) {
    throw std::invalid_argument(
        "partition: child powers do not sum to the parent power");
  }
  if (!rel_close(low.rate + high.rate, total_rate, tol,
                 std::max(1.0, total_rate))) {
    throw std::invalid_argument(
        "partition: child rates do not sum to the parent rate");
  }
}

}  // namespace

Region::Region(Rect only) : count_(1) { rects_[0] = only; }

Region::Region(Rect upper, Rect lower) : count_(2) {
  if (!(upper.nis > lower.top())) {
    throw std::invalid_argument("region: two rects must be strictly separated, "
                                "upper first");
  }
  rects_[0] = upper;
  rects_[1] = lower;
}

Region Region::from_pieces(std::vector<Rect> pieces, double tol,
                           double power_scale) {
  if (pieces.empty()) {
    throw std::invalid_argument("region: no pieces");
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Rect& a, const Rect& b) { return a.nis > b.nis; });
  // Absorb pieces that carry no meaningful power into a surviving neighbor,
  // keeping the total exact.
  const double drop = tol * power_scale;
  while (pieces.size() > 1) {
    std::size_t smallest = 0;
    for (std::size_t k = 1; k < pieces.size(); ++k) {
      if (pieces[k].power < pieces[smallest].power) smallest = k;
    }
    if (pieces[smallest].power >= drop) break;
    const std::size_t into = smallest == 0 ? 1 : smallest - 1;
    pieces[into].power += pieces[smallest].power;
    pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(smallest));
  }
  // Merge pieces whose gap closes within tolerance.
  for (std::size_t k = 0; k + 1 < pieces.size();) {
    const double gap = pieces[k].nis - pieces[k + 1].top();
    const double band = tol * std::max(1.0, pieces[k].nis);
    if (gap > band) {
      ++k;
      continue;
    }
    if (gap < -band) {
      throw InternalError("region: pieces overlap beyond tolerance");
    }
    pieces[k + 1].power += pieces[k].power;
    pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(k));
  }
  if (pieces.size() > 2) {
    throw InternalError("region: more than two disjoint rects");
  }
  return pieces.size() == 1 ? Region(pieces[0]) : Region(pieces[0], pieces[1]);
}

double Region::total_power() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < count_; ++k) sum += rects_[k].power;
  return sum;
}

double Region::rate() const {
  double sum = 0.0;
  for (std::size_t k = 0; k < count_; ++k) {
    sum += capacity(rects_[k].power, rects_[k].nis);
  }
  return sum;
}

FillPattern choose_fill_pattern(const Region& parent, const NodeEntry& low_child) {
  if (parent.count() != 2) {
    throw std::invalid_argument("choose_fill_pattern: parent must have two rects");
  }
  const double p1 = parent.upper().power, d1 = parent.upper().nis;
  const double p2 = parent.lower().power, d2 = parent.lower().nis;
  const double pj = low_child.power, rj = low_child.rate;
  if (p1 >= pj && p2 >= pj) return FillPattern::SplitOuter;
  if (p1 <= pj && p2 <= pj) return FillPattern::SplitInner;
  if (p1 >= pj) {
    // Only the upper rect can hold the whole child.
    const double spare = pj - p2;
    const double thresh =
        capacity(p2, d2) + capacity(spare, (p1 + d1) - spare);
    return rj >= thresh ? FillPattern::FillLowerFloatUpper
                        : FillPattern::SplitOuter;
  }
  // Only the lower rect can hold the whole child.
  const double thresh = capacity(p1, d1) + capacity(pj - p1, d2);
  return rj >= thresh ? FillPattern::SplitOuter
                      : FillPattern::FillUpperFloatLower;
}

std::pair<Region, Region> partition_single_rect(const Rect& parent,
                                                const NodeEntry& low,
                                                const NodeEntry& high,
                                                PairRelation relation,
                                                double tol) {
  check_children(low, high, relation, parent.power,
                 capacity(parent.power, parent.nis), tol);
  if (relation == PairRelation::Contiguous) {
    // The children stack exactly, smaller NIS at the bottom.
    return {Region(Rect{low.power, parent.nis}),
            Region(Rect{high.power, parent.nis + low.power})};
  }
  // The larger-NIS child stays unsplit in place; the other is split around
  // it so that the three pieces tile the parent rect.
  const double eps =
      (parent.power + parent.nis - (high.power + high.nis)) / low.power;
  if (eps < -tol || eps > 1.0 + tol) {
    throw NumericalError(node_label(low) +
                         ": splitting coefficient outside [0, 1]");
  }
  const double up = std::clamp(eps, 0.0, 1.0) * low.power;
  const double dn = low.power - up;
  const double snap = tol * parent.power;
  if (up < snap) {
    return {Region(Rect{low.power, parent.nis}),
            Region(Rect{high.power, parent.nis + low.power})};
  }
  if (dn < snap) {
    return {Region(Rect{low.power, parent.nis + high.power}),
            Region(Rect{high.power, parent.nis})};
  }
  const double mid = parent.nis + dn;  // unsplit child's bottom
  return {Region(Rect{up, mid + high.power}, Rect{dn, parent.nis}),
          Region(Rect{high.power, mid})};
}

std::pair<Region, Region> partition_double_rect(const Region& parent,
                                                const NodeEntry& low,
                                                const NodeEntry& high,
                                                PairRelation relation,
                                                double tol) {
  if (parent.count() != 2) {
    throw std::invalid_argument("partition_double_rect: parent must have two rects");
  }
  check_children(low, high, relation, parent.total_power(), parent.rate(), tol);

  const double p1 = parent.upper().power, d1 = parent.upper().nis;
  const double p2 = parent.lower().power, d2 = parent.lower().nis;
  const double t1 = p1 + d1, t2 = p2 + d2;
  const double pj = low.power, rj = low.rate;
  const double total = parent.total_power();
  const double q = std::exp2(2.0 * rj);
  const double snap = tol * total;

  const FillPattern pattern = choose_fill_pattern(parent, low);
  double eps;
  switch (pattern) {
    case FillPattern::SplitOuter:
      eps = (t1 * (d2 * q - pj - d2)) / (pj * (d2 * q - t1));
      break;
    case FillPattern::SplitInner:
      eps = 1.0 - (t2 * (d1 * q - pj - d1)) / (pj * (d1 * q - t2));
      break;
    case FillPattern::FillLowerFloatUpper:
      eps = 1.0 - p2 / pj;
      break;
    default:  // FillUpperFloatLower
      eps = p1 / pj;
      break;
  }
  if (eps < -tol || eps > 1.0 + tol) {
    throw NumericalError(node_label(low) +
                         ": splitting coefficient outside [0, 1]");
  }
  const double e_lo = std::max(0.0, 1.0 - p2 / pj);
  const double e_hi = std::min(1.0, p1 / pj);
  eps = std::clamp(eps, e_lo, e_hi);

  // Cross-check the closed form against the independent placement sweep.
  const SweepPoint probe = solve_sweep(pattern, parent, pj, rj, tol);
  if (std::abs(eps - probe.eps) > 1e-6 * std::max(1.0, std::abs(eps))) {
    throw InternalError(node_label(low) +
                        ": closed-form splitting coefficient disagrees with "
                        "the sweep oracle");
  }

  const double up = eps * pj;
  const double dn = pj - up;
  std::vector<Rect> low_pieces, high_pieces;
  switch (pattern) {
    case FillPattern::SplitOuter:
      if (up < snap) {
        low_pieces = {{pj, d2}};
        high_pieces = {{p1, d1}, {p2 - pj, d2 + pj}};
      } else if (dn < snap) {
        low_pieces = {{pj, t1 - pj}};
        high_pieces = {{p1 - pj, d1}, {p2, d2}};
      } else {
        low_pieces = {{up, t1 - up}, {dn, d2}};
        high_pieces = {{p1 - up, d1}, {p2 - dn, d2 + dn}};
      }
      break;
    case FillPattern::SplitInner:
      if (up < snap) {
        low_pieces = {{pj, t2 - pj}};
        high_pieces = {{p1, d1}, {p2 - pj, d2}};
      } else if (dn < snap) {
        low_pieces = {{pj, d1}};
        high_pieces = {{p1 - pj, d1 + pj}, {p2, d2}};
      } else {
        low_pieces = {{up, d1}, {dn, t2 - dn}};
        high_pieces = {{p1 - up, d1 + up}, {p2 - dn, d2}};
      }
      break;
    case FillPattern::FillLowerFloatUpper: {
      if (up < snap) {  // the child is (within tolerance) exactly the lower rect
        low_pieces = {{pj, d2}};
        high_pieces = {{total - pj, d1}};
        break;
      }
      const double residual = rj - capacity(dn, d2);
      if (!(residual > 0.0)) {
        throw NumericalError(node_label(low) +
                             ": floating piece left with no rate to carry");
      }
      double nu = std::clamp(nis_for_rate(residual, up), d1, t1 - up);
      if (std::abs(nu - probe.float_nis) > 1e-6 * std::max(1.0, nu)) {
        throw InternalError(node_label(low) +
                            ": floating-piece position disagrees with the "
                            "sweep oracle");
      }
      low_pieces = {{up, nu}, {dn, d2}};
      high_pieces = {{nu - d1, d1}, {t1 - (nu + up), nu + up}};
      break;
    }
    default: {  // FillUpperFloatLower
      if (dn < snap) {  // the child is (within tolerance) exactly the upper rect
        low_pieces = {{pj, d1}};
        high_pieces = {{total - pj, d2}};
        break;
      }
      const double residual = rj - capacity(up, d1);
      if (!(residual > 0.0)) {
        throw NumericalError(node_label(low) +
                             ": floating piece left with no rate to carry");
      }
      double nu = std::clamp(nis_for_rate(residual, dn), d2, t2 - dn);
      if (std::abs(nu - probe.float_nis) > 1e-6 * std::max(1.0, nu)) {
        throw InternalError(node_label(low) +
                            ": floating-piece position disagrees with the "
                            "sweep oracle");
      }
      low_pieces = {{up, d1}, {dn, nu}};
      high_pieces = {{nu - d2, d2}, {t2 - (nu + dn), nu + dn}};
      break;
    }
  }
  return {Region::from_pieces(std::move(low_pieces), tol, total),
          Region::from_pieces(std::move(high_pieces), tol, total)};
}

double epsilon_bisection(FillPattern pattern, const Region& parent,
                         const NodeEntry& low_child, double tol) {
  if ((pattern == FillPattern::FloatPartner) != (parent.count() == 1)) {
    throw std::invalid_argument(
        "epsilon_bisection: pattern does not match the parent rect count");
  }
  const double pj = low_child.power;
  if (!(pj > 0.0) || !(low_child.rate > 0.0)) {
    throw std::invalid_argument("epsilon_bisection: child needs positive power and rate");
  }
  if (pattern == FillPattern::FloatPartner && !(parent[0].power > pj)) {
    throw std::invalid_argument("epsilon_bisection: partner needs positive power");
  }
  if (pattern == FillPattern::FillLowerFloatUpper && !(pj > parent.lower().power)) {
    throw std::invalid_argument("epsilon_bisection: child must overfill the lower rect");
  }
  if (pattern == FillPattern::FillUpperFloatLower && !(pj > parent.upper().power)) {
    throw std::invalid_argument("epsilon_bisection: child must overfill the upper rect");
  }
  return solve_sweep(pattern, parent, pj, low_child.rate, tol).eps;
}

SplitPlan compute_split_plan(const RateAllocation& ra, double tol) {
  const CombinationTree tree = build_combination_tree(ra, tol);
  const std::size_t n = ra.size();

  std::vector<Region> regions(tree.nodes.size());
  regions[static_cast<std::size_t>(tree.root())] =
      Region(Rect{ra.total_power(), ra.noise});
  for (auto it = tree.merge_order.rbegin(); it != tree.merge_order.rend(); ++it) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(*it)];
    const Region& reg = regions[static_cast<std::size_t>(*it)];
    if (!rel_close(reg.total_power(), node.entry.power, tol, node.entry.power)) {
      throw InternalError("tree node " + std::to_string(*it + 1) +
                          ": region power does not match the node power");
    }
    const NodeEntry& lo = tree.nodes[static_cast<std::size_t>(node.child_low)].entry;
    const NodeEntry& hi = tree.nodes[static_cast<std::size_t>(node.child_high)].entry;
    try {
      auto [low_region, high_region] =
          reg.count() == 1
              ? partition_single_rect(reg[0], lo, hi, node.relation, tol)
              : partition_double_rect(reg, lo, hi, node.relation, tol);
      regions[static_cast<std::size_t>(node.child_low)] = low_region;
      regions[static_cast<std::size_t>(node.child_high)] = high_region;
    } catch (const NumericalError& e) {
      throw NumericalError("tree node " + std::to_string(*it + 1) + ": " + e.what());
    } catch (const InternalError& e) {
      throw InternalError("tree node " + std::to_string(*it + 1) + ": " + e.what());
    }
  }

  SplitPlan plan;
  plan.epsilon.assign(n, 1.0);
  plan.virtual_users.reserve(2 * n - 1);
  for (std::size_t u = 0; u < n; ++u) {
    const Region& reg = regions[u];
    if (reg.count() == 2) {
      plan.epsilon[u] = reg.upper().power / ra.powers[u];
    }
    for (std::size_t k = 0; k < reg.count(); ++k) {
      plan.virtual_users.push_back({static_cast<int>(u), reg[k].power,
                                    reg[k].nis,
                                    capacity(reg[k].power, reg[k].nis)});
    }
  }
  std::sort(plan.virtual_users.begin(), plan.virtual_users.end(),
            [](const VirtualUser& a, const VirtualUser& b) {
              if (a.nis != b.nis) return a.nis < b.nis;
              return a.parent_user < b.parent_user;
            });
  plan.decode_order.resize(plan.virtual_users.size());
  std::iota(plan.decode_order.rbegin(), plan.decode_order.rend(), std::size_t{0});
  return plan;
}

}  // namespace macsplit
