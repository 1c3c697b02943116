#include "macsplit/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace macsplit {

VerificationReport verify_plan(const SplitPlan& plan, const RateAllocation& ra,
                               double tol) {
  const std::size_t n = ra.size();
  const std::size_t m = plan.virtual_users.size();
  if (plan.epsilon.size() != n) {
    throw std::invalid_argument("verify_plan: epsilon count does not match the user count");
  }
  if (plan.decode_order.size() != m) {
    throw std::invalid_argument("verify_plan: decode order length does not match the piece count");
  }
  std::vector<int> pieces_per_user(n, 0);
  for (const VirtualUser& vu : plan.virtual_users) {
    if (vu.parent_user < 0 || static_cast<std::size_t>(vu.parent_user) >= n) {
      throw std::invalid_argument("verify_plan: piece references an unknown user");
    }
    if (!(vu.power > 0.0) || !std::isfinite(vu.power) || !(vu.nis > 0.0) ||
        !std::isfinite(vu.nis)) {
      throw std::invalid_argument("verify_plan: piece with nonpositive power or NIS");
    }
    if (++pieces_per_user[static_cast<std::size_t>(vu.parent_user)] > 2) {
      throw std::invalid_argument("verify_plan: a user has more than two pieces");
    }
  }
  std::vector<bool> seen(m, false);
  for (std::size_t idx : plan.decode_order) {
    if (idx >= m || seen[idx]) {
      throw std::invalid_argument("verify_plan: decode order is not a permutation of the pieces");
    }
    seen[idx] = true;
  }

  VerificationReport report;
  report.virtual_count = m;
  report.reconstructed_rates.assign(n, 0.0);

  double undecoded = 0.0;
  for (const VirtualUser& vu : plan.virtual_users) undecoded += vu.power;
  for (std::size_t idx : plan.decode_order) {
    const VirtualUser& vu = plan.virtual_users[idx];
    undecoded -= vu.power;
    report.max_stack_gap =
        std::max(report.max_stack_gap, std::abs(vu.nis - (ra.noise + undecoded)));
    report.reconstructed_rates[static_cast<std::size_t>(vu.parent_user)] +=
        capacity(vu.power, vu.nis);
  }
  report.per_user_rate_error.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    report.per_user_rate_error[u] =
        std::abs(report.reconstructed_rates[u] - ra.rates[u]);
  }
  report.stacking_ok =
      report.max_stack_gap <= tol * (ra.noise + ra.total_power());
  return report;
}

bool verification_passed(const VerificationReport& report,
                         const RateAllocation& ra, double tol) {
  if (!report.stacking_ok) return false;
  const double rate_band = tol * std::max(1.0, ra.total_rate());
  for (double err : report.per_user_rate_error) {
    if (err > rate_band) return false;
  }
  return true;
}

RateAllocation sample_dominant_face(const std::vector<Power>& powers,
                                    double noise,
                                    const std::vector<WeightedPermutation>& mix,
                                    double tol) {
  if (mix.empty()) {
    throw std::invalid_argument("sample_dominant_face: need at least one permutation");
  }
  double weight_sum = 0.0;
  bool any_positive = false;
  for (const WeightedPermutation& wp : mix) {
    if (wp.weight < 0.0 || !std::isfinite(wp.weight)) {
      throw std::invalid_argument("sample_dominant_face: weights must be nonnegative");
    }
    weight_sum += wp.weight;
    any_positive = any_positive || wp.weight > 0.0;
  }
  if (!any_positive) {
    throw std::invalid_argument("sample_dominant_face: need a positive weight");
  }
  if (std::abs(weight_sum - 1.0) > tol) {
    throw std::invalid_argument("sample_dominant_face: weights must sum to 1");
  }
  std::vector<Rate> rates(powers.size(), 0.0);
  for (const WeightedPermutation& wp : mix) {
    if (wp.weight == 0.0) continue;
    const std::vector<Rate> vr = vertex_rates(powers, noise, wp.order);
    for (std::size_t k = 0; k < rates.size(); ++k) {
      rates[k] += wp.weight * vr[k];
    }
  }
  return RateAllocation(powers, std::move(rates), noise);
}

RateAllocation sample_dominant_face(const std::vector<Power>& powers,
                                    double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t count = std::max<std::size_t>(2, powers.size());
  std::vector<WeightedPermutation> mix(count);
  double weight_sum = 0.0;
  for (WeightedPermutation& wp : mix) {
    wp.order.resize(powers.size());
    std::iota(wp.order.begin(), wp.order.end(), std::size_t{0});
    std::shuffle(wp.order.begin(), wp.order.end(), rng);
    wp.weight = unit(rng) + 1e-3;
    weight_sum += wp.weight;
  }
  for (WeightedPermutation& wp : mix) wp.weight /= weight_sum;
  return sample_dominant_face(powers, noise, mix);
}

}  // namespace macsplit
