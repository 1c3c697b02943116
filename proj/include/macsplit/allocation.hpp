#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "macsplit/shannon.hpp"

namespace macsplit {

// Encoding order: pi[i] is the user whose stream is stacked i-th from the
// noise floor. The receiver decodes the inverse sequence pi[n-1] ... pi[0].
using Permutation = std::vector<std::size_t>;

bool is_permutation(const Permutation& pi);

/// A rate allocation: n users with per-user transmit power and target rate,
/// sharing an adder channel with noise power `noise`.
struct RateAllocation {
  RateAllocation(std::vector<Power> powers_in, std::vector<Rate> rates_in,
                 double noise_in);

  std::vector<Power> powers;
  std::vector<Rate> rates;
  double noise;

  std::size_t size() const { return powers.size(); }
  double total_power() const;
  double total_rate() const;
};

/// Per-user tolerable noise-plus-interference power, plus the user order
/// sorted by increasing NIS (ties broken by lower user index).
struct NisProfile {
  std::vector<Nis> nis;
  Permutation order;
};

// How two stream rectangles relate once sorted by NIS (lower first):
//   Overlapping    upper.nis < lower.nis + lower.power   (needs splitting)
//   Contiguous     upper.nis = lower.nis + lower.power   (stacks exactly)
//   Discontinuous  upper.nis > lower.nis + lower.power   (a gap; not tight)
enum class PairRelation { Overlapping, Discontinuous, Contiguous };

enum class MembershipStatus { Outside, Interior, DominantFace };

struct MembershipVerdict {
  MembershipStatus status = MembershipStatus::Outside;
  // Present iff status == Outside: a subset with the largest rate excess.
  std::optional<std::vector<std::size_t>> violated_subset;
  // Largest R(A) - C(A) over all nonempty subsets A.
  double max_violation = 0.0;
  // C(I) - R(I): how far the sum rate sits below the dominant face.
  double sum_gap = 0.0;
};

/// Thrown when an operation requires a rate tuple on the dominant face but
/// the input is not one; carries the membership verdict for diagnostics.
class NotTightError : public std::runtime_error {
 public:
  NotTightError(const std::string& what, MembershipVerdict verdict);
  const MembershipVerdict& verdict() const { return verdict_; }

 private:
  MembershipVerdict verdict_;
};

inline constexpr std::size_t kMembershipUserCap = 20;

/// Per-user NIS via nis_for_rate, with the increasing-NIS user order.
NisProfile compute_nis(const RateAllocation& ra);

/// Classify an ordered pair of streams; the caller supplies them sorted so
/// that lower_nis <= upper_nis. The contiguity boundary is decided within
/// tol * max(lower_power, lower_nis).
PairRelation classify_pair(Power lower_power, Nis lower_nis, Power upper_power,
                           Nis upper_nis, double tol = kDefaultTolerance);

/// Checks every nonempty subset constraint R(A) <= 0.5*log2(1 + P(A)/noise)
/// by direct enumeration of the 2^n subsets. DominantFace requires the
/// full-set constraint to hold with equality within tol (scaled by the sum
/// capacity). Throws std::length_error when ra.size() > max_users.
MembershipVerdict polymatroid_membership(const RateAllocation& ra,
                                         double tol = kDefaultTolerance,
                                         std::size_t max_users = kMembershipUserCap);

/// Rates achieved by plain successive decoding under encoding order `pi`:
/// user pi[i] gets capacity(P[pi[i]], noise + sum of P[pi[l]] for l < i).
/// The result is always a dominant-face point (a vertex).
std::vector<Rate> vertex_rates(const std::vector<Power>& powers, double noise,
                               const Permutation& pi);

}  // namespace macsplit
