#pragma once

#include <span>
#include <vector>

#include "macsplit/allocation.hpp"

namespace macsplit {

/// A user or superuser taking part in the pairwise combination process.
struct NodeEntry {
  int id = -1;
  Power power = 0.0;
  Rate rate = 0.0;
  Nis nis = 0.0;
  std::vector<int> members;  // sorted original user indices
};

struct CombinablePair {
  std::size_t low_index = 0;   // position in the input sequence, smaller NIS
  std::size_t high_index = 0;  // position in the input sequence, larger NIS
  PairRelation relation = PairRelation::Overlapping;
};

struct TreeNode {
  NodeEntry entry;
  int child_low = -1;   // child with the smaller NIS at merge time
  int child_high = -1;  // child with the larger NIS at merge time
  int parent = -1;
  PairRelation relation = PairRelation::Contiguous;  // of the two children

  bool is_leaf() const { return child_low < 0; }
};

/// Binary tree recording how users were pairwise merged into one superuser
/// carrying the total power and total rate. Leaves are nodes 0..n-1 (the
/// users); internal nodes follow in creation order. Reversing merge_order
/// gives a valid splitting order: every node's region is fixed before the
/// node itself is split.
struct CombinationTree {
  std::vector<TreeNode> nodes;
  std::vector<int> merge_order;  // internal node ids in creation order
  std::size_t user_count = 0;
  double noise = 0.0;

  int root() const {
    return merge_order.empty() ? 0 : merge_order.back();
  }
};

/// Find the lowest-NIS adjacent pair (in increasing-NIS order, ties broken
/// by lower node id) whose relation is Overlapping or Contiguous. Such a
/// pair always exists when the entries form a tight allocation; if none is
/// found the input was not tight (or the tolerance is misconfigured) and an
/// InternalError is thrown.
CombinablePair find_combinable_pair(std::span<const NodeEntry> entries,
                                    double tol = kDefaultTolerance);

/// Merge two entries into a superuser: power and rate add, the NIS is
/// recomputed from the combined rate and power, members are united.
NodeEntry combine(const NodeEntry& a, const NodeEntry& b);

/// Repeatedly merge combinable pairs until a single superuser carrying the
/// total power and total rate remains. Requires a dominant-face input
/// (throws NotTightError otherwise). Every intermediate entry set is itself
/// tight; the root NIS equals the noise power within tol.
CombinationTree build_combination_tree(const RateAllocation& ra,
                                       double tol = kDefaultTolerance);

/// Invariant violations that indicate a bug or a misconfigured tolerance
/// rather than bad user input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace macsplit
