#include "macsplit/allocation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace macsplit {

bool is_permutation(const Permutation& pi) {
  std::vector<bool> seen(pi.size(), false);
  for (std::size_t v : pi) {
    if (v >= pi.size() || seen[v]) return false;
    seen[v] = true;
  }
  return !pi.empty();
}

RateAllocation::RateAllocation(std::vector<Power> powers_in,
                               std::vector<Rate> rates_in, double noise_in)
    : powers(std::move(powers_in)), rates(std::move(rates_in)), noise(noise_in) {
  if (powers.empty()) {
    throw std::invalid_argument("rate allocation: need at least one user");
  }
  if (powers.size() != rates.size()) {
    throw std::invalid_argument("rate allocation: powers/rates length mismatch");
  }
  if (!(noise > 0.0) || !std::isfinite(noise)) {
    throw std::invalid_argument("rate allocation: noise must be positive and finite");
  }
  for (std::size_t k = 0; k < powers.size(); ++k) {
    if (!(powers[k] > 0.0) || !std::isfinite(powers[k])) {
      throw std::invalid_argument("rate allocation: power of user " +
                                  std::to_string(k + 1) +
                                  " must be positive and finite");
    }
    if (!(rates[k] > 0.0) || !std::isfinite(rates[k])) {
      throw std::invalid_argument("rate allocation: rate of user " +
                                  std::to_string(k + 1) +
                                  " must be positive and finite");
    }
  }
}

double RateAllocation::total_power() const {
  return std::accumulate(powers.begin(), powers.end(), 0.0);
}

double RateAllocation::total_rate() const {
  return std::accumulate(rates.begin(), rates.end(), 0.0);
}

NotTightError::NotTightError(const std::string& what, MembershipVerdict verdict)
    : std::runtime_error(what), verdict_(std::move(verdict)) {}

NisProfile compute_nis(const RateAllocation& ra) {
  NisProfile out;
  out.nis.reserve(ra.size());
  for (std::size_t k = 0; k < ra.size(); ++k) {
    out.nis.push_back(nis_for_rate(ra.rates[k], ra.powers[k]));
  }
  out.order.resize(ra.size());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::size_t a, std::size_t b) { return out.nis[a] < out.nis[b]; });
  return out;
}

PairRelation classify_pair(Power lower_power, Nis lower_nis, Power upper_power,
                           Nis upper_nis, double tol) {
  (void)upper_power;
  if (lower_nis > upper_nis) {
    throw std::invalid_argument("classify_pair: inputs must be ordered by nis");
  }
  const double boundary = lower_nis + lower_power;
  const double scale = std::max(lower_power, lower_nis);
  if (std::abs(upper_nis - boundary) <= tol * scale) return PairRelation::Contiguous;
  return upper_nis < boundary ? PairRelation::Overlapping
                              : PairRelation::Discontinuous;
}

MembershipVerdict polymatroid_membership(const RateAllocation& ra, double tol,
                                         std::size_t max_users) {
  const std::size_t n = ra.size();
  if (n > max_users) {
    throw std::length_error("polymatroid_membership: " + std::to_string(n) +
                            " users exceeds the enumeration cap of " +
                            std::to_string(max_users));
  }
  const std::size_t total = std::size_t{1} << n;
  // Subset sums by reusing the sum of the subset minus its lowest element.
  std::vector<double> subset_power(total, 0.0);
  std::vector<double> subset_rate(total, 0.0);
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t worst_mask = 0;
  for (std::size_t mask = 1; mask < total; ++mask) {
    const int low = std::countr_zero(mask);
    const std::size_t rest = mask & (mask - 1);
    subset_power[mask] = subset_power[rest] + ra.powers[low];
    subset_rate[mask] = subset_rate[rest] + ra.rates[low];
    const double violation =
        subset_rate[mask] - capacity(subset_power[mask], ra.noise);
    if (violation > worst) {
      worst = violation;
      worst_mask = mask;
    }
  }
  const double scale = capacity(ra.total_power(), ra.noise);

  MembershipVerdict verdict;
  verdict.max_violation = worst;
  verdict.sum_gap = scale - subset_rate[total - 1];
  if (worst > tol * scale) {
    verdict.status = MembershipStatus::Outside;
    std::vector<std::size_t> subset;
    for (std::size_t k = 0; k < n; ++k) {
      if (worst_mask >> k & 1U) subset.push_back(k);
    }
    verdict.violated_subset = std::move(subset);
  } else if (verdict.sum_gap <= tol * scale) {
    verdict.status = MembershipStatus::DominantFace;
  } else {
    verdict.status = MembershipStatus::Interior;
  }
  return verdict;
}

std::vector<Rate> vertex_rates(const std::vector<Power>& powers, double noise,
                               const Permutation& pi) {
  if (pi.size() != powers.size() || !is_permutation(pi)) {
    throw std::invalid_argument("vertex_rates: invalid permutation");
  }
  if (!(noise > 0.0) || !std::isfinite(noise)) {
    throw std::invalid_argument("vertex_rates: noise must be positive and finite");
  }
  for (double p : powers) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("vertex_rates: powers must be positive and finite");
    }
  }
  std::vector<Rate> rates(powers.size(), 0.0);
  double interference = noise;
  for (std::size_t user : pi) {
    rates[user] = capacity(powers[user], interference);
    interference += powers[user];
  }
  return rates;
}

}  // namespace macsplit
