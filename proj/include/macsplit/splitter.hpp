#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "macsplit/combiner.hpp"

namespace macsplit {

/// A power rectangle in the stack picture: occupies [nis, nis + power).
struct Rect {
  Power power = 0.0;
  Nis nis = 0.0;

  double top() const { return nis + power; }
};

/// The part of the power stack a node occupies: one rectangle, or two
/// strictly separated ones (the upper stored first). Rects whose gap closes
/// within tolerance are merged; rects carrying no power are absorbed.
class Region {
 public:
  Region() = default;
  explicit Region(Rect only);
  Region(Rect upper, Rect lower);  // requires strict separation

  /// Normalize a raw piece list: drop pieces below tol*power_scale
  /// (absorbing their power into the nearest survivor), merge touching
  /// pieces, order upper-first. At most two pieces may survive.
  static Region from_pieces(std::vector<Rect> pieces, double tol,
                            double power_scale);

  std::size_t count() const { return count_; }
  const Rect& operator[](std::size_t k) const { return rects_[k]; }
  const Rect& upper() const { return rects_[0]; }
  const Rect& lower() const { return rects_[count_ - 1]; }

  double total_power() const;
  double rate() const;  // sum of capacity(power, nis) over the rects

 private:
  std::array<Rect, 2> rects_{};
  std::size_t count_ = 0;
};

/// One decodable piece of an original user's stream.
struct VirtualUser {
  int parent_user = -1;
  Power power = 0.0;
  Nis nis = 0.0;
  Rate rate = 0.0;
};

/// Complete splitting plan: per-user splitting coefficients, all stream
/// pieces, and the successive-decoding order.
struct SplitPlan {
  // Fraction of each user's power carried by its upper piece; 1 (or 0)
  // means the user is not split.
  std::vector<double> epsilon;
  // All pieces, sorted by increasing NIS (bottom of the stack first).
  std::vector<VirtualUser> virtual_users;
  // Indices into virtual_users, first-decoded first (largest NIS first).
  std::vector<std::size_t> decode_order;
};

// Families of piece placements when dividing a parent region between a
// split child j (the smaller-NIS child) and its sibling. Named after where
// j's power goes:
//   SplitOuter          j at the top of the upper rect + bottom of the lower
//   SplitInner          j at the bottom of the upper rect + top of the lower
//   FillLowerFloatUpper j fills the lower rect; the remainder floats inside
//                       the upper rect at the NIS that makes j's rate exact
//   FillUpperFloatLower mirror image of the previous family
//   FloatPartner        single-rect parent: the unsplit sibling floats and
//                       j wraps around it
enum class FillPattern {
  SplitOuter,
  SplitInner,
  FillLowerFloatUpper,
  FillUpperFloatLower,
  FloatPartner,
};

/// Pattern family a double-rect partition will use for the given split
/// child, per the power-fit case analysis and rate thresholds.
FillPattern choose_fill_pattern(const Region& parent, const NodeEntry& low_child);

/// Divide a single parent rect between its two children. Contiguous
/// children stack directly (smaller NIS at the bottom); overlapping
/// children leave the larger-NIS child unsplit in place and split the
/// other around it. Returns (region for low, region for high).
std::pair<Region, Region> partition_single_rect(const Rect& parent,
                                                const NodeEntry& low,
                                                const NodeEntry& high,
                                                PairRelation relation,
                                                double tol = kDefaultTolerance);

/// Divide a two-rect parent region between its two children, choosing the
/// placement family from the power-fit cases and solving the splitting
/// coefficient in closed form. Every call is cross-checked against the
/// epsilon_bisection sweep; disagreement beyond 1e-6 relative is a hard
/// error. Returns (region for low, region for high).
std::pair<Region, Region> partition_double_rect(const Region& parent,
                                                const NodeEntry& low,
                                                const NodeEntry& high,
                                                PairRelation relation,
                                                double tol = kDefaultTolerance);

/// Independent numeric route to the splitting coefficient: sweep the
/// pattern's free placement parameter and bisect the monotone map from
/// placement to the split child's achieved rate. Converges to interval
/// width 1e-14 (at most 200 iterations). Throws NumericalError when the
/// child's rate falls outside the pattern's achievable bracket.
double epsilon_bisection(FillPattern pattern, const Region& parent,
                         const NodeEntry& low_child,
                         double tol = kDefaultTolerance);

/// Full planning pipeline: build the combination tree, walk the merges in
/// reverse splitting the regions, collect the leaf pieces, and derive the
/// decode order (decreasing NIS). Requires a dominant-face input.
SplitPlan compute_split_plan(const RateAllocation& ra,
                             double tol = kDefaultTolerance);

/// A partition step produced a coefficient or placement that is outside
/// its admissible range beyond tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace macsplit
