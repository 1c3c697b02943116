#pragma once

#include <cstdint>
#include <vector>

#include "macsplit/splitter.hpp"

namespace macsplit {

/// Outcome of independently replaying a plan. Numeric mismatches are
/// recorded, never thrown; only structural damage (unknown users, duplicate
/// pieces) raises an error.
struct VerificationReport {
  bool stacking_ok = false;
  // Absolute reconstruction error per original user.
  std::vector<double> per_user_rate_error;
  // Per-user rate recomputed from (power, NIS) pairs alone.
  std::vector<Rate> reconstructed_rates;
  std::size_t virtual_count = 0;
  // Largest |asserted NIS - (noise + undecoded power)| over the decode walk.
  double max_stack_gap = 0.0;
};

/// Simulate successive decoding over the plan's decode order: every piece's
/// asserted NIS must equal the noise power plus the total power of all
/// not-yet-decoded pieces; piece rates are recomputed from (power, NIS) and
/// summed per user. Nothing stored in the plan beyond (power, NIS) and the
/// order is trusted.
VerificationReport verify_plan(const SplitPlan& plan, const RateAllocation& ra,
                               double tol = kDefaultTolerance);

/// True when stacking holds and every per-user rate error is within
/// tol * max(1, total target rate).
bool verification_passed(const VerificationReport& report,
                         const RateAllocation& ra,
                         double tol = kDefaultTolerance);

struct WeightedPermutation {
  Permutation order;
  double weight = 0.0;
};

/// Convex combination of successive-decoding vertices: the weighted mix of
/// vertex_rates over the given permutations. Weights must be nonnegative
/// and sum to 1 within tol. The result always lies on the dominant face.
RateAllocation sample_dominant_face(const std::vector<Power>& powers,
                                    double noise,
                                    const std::vector<WeightedPermutation>& mix,
                                    double tol = kDefaultTolerance);

/// Seeded convenience sampler: mixes max(2, n) random permutations with
/// random weights drawn from a deterministic generator.
RateAllocation sample_dominant_face(const std::vector<Power>& powers,
                                    double noise, std::uint64_t seed);

}  // namespace macsplit
