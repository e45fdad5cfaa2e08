#pragma once

// Closed-form outage probability of a cooperative (CoMP) downlink under
// Rayleigh fading.
//
// With H_i ~ Exponential(mean P_i) the SINR of a user served jointly by the
// set N is  sum_{n in N} H_n / (sum_{k not in N} H_k + noise). The sum of
// the serving terms is hypoexponential, whose CCDF is a partial-fraction
// mixture of exponentials; integrating it against the interferer densities
// gives
//
//   P_out(g) = 1 - sum_n exp(-g*noise/P_n) prod_{j!=n} P_n/(P_n-P_j)
//                                          prod_k    P_n/(g*P_k+P_n).
//
// The mixture weights alternate in sign and blow up when serving powers
// cluster, so every evaluation reports how well conditioned it was and falls
// back to a seeded Monte-Carlo estimate when cancellation is too severe.

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "comp/query.hpp"

namespace comp {

/// Two powers closer than the separation policy allows, with perturbation
/// disabled.
class DegeneratePowersError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The closed form lost too much precision and the Monte-Carlo fallback is
/// disabled.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConditioningPolicy {
  double min_relative_gap = 1e-6;
  bool allow_perturbation = true;
  double cancellation_limit = 1e12;  // max |term| / |sum| before falling back
  bool allow_fallback = true;
  std::size_t fallback_samples = 1'000'000;
};

struct ConditioningReport {
  /// Smallest |P_i - P_j| / max(P_i, P_j) over all pairs after separation;
  /// 1 when there is no pair.
  double min_relative_gap = 1.0;
  bool perturbed = false;
  bool fell_back_to_oracle = false;
  /// max |term| / |sum| of the last closed-form evaluation.
  double cancellation_ratio = 0.0;

  /// Combines reports from several evaluations (worst case of each field).
  void merge(const ConditioningReport& other) noexcept;
};

struct OutageResult {
  double probability = 0.0;
  ConditioningReport report;
};

/// Powers after the separation policy: serving and interferer powers jointly
/// pairwise separated by at least the policy's relative gap.
struct SeparatedPowers {
  std::vector<double> serving;
  std::vector<double> interferers;
  double min_relative_gap = 1.0;
  bool perturbed = false;
};

/// Enforces the minimum pairwise relative gap. A power too close to a larger
/// one is scaled by (1 - k*gap), k = 1, 2, ..., until it is far enough.
/// Throws DegeneratePowersError when a violation exists and perturbation is
/// disabled.
SeparatedPowers separate_powers(std::span<const double> serving,
                                std::span<const double> interferers,
                                const ConditioningPolicy& policy = {});

/// Smallest pairwise relative gap over the union of both lists (1 if fewer
/// than two values).
double min_relative_gap(std::span<const double> a, std::span<const double> b = {});

/// sum_n prod_{j!=n} P_n / (P_n - P_j), unclamped. Equals 1 for distinct
/// powers; the distance from 1 measures the rounding in the weights.
double partial_fraction_sum(std::span<const double> powers);

/// P(sum_n H_n > x) for independent H_n ~ Exponential(mean P_n). Raw closed
/// form, clamped to [0, 1]; no Monte-Carlo fallback.
double gen_chi2_ccdf(const PowerSet& powers, double x, const ConditioningPolicy& policy = {});

/// SISO outage: 1 - exp(-g*noise/P1) prod_k P1/(P1 + g*P_k).
double siso_outage(double serving_power, const PowerSet& interferers, double noise_power,
                   double threshold);

/// Outage probability as a function of the SINR threshold for one link.
/// Construction applies the separation policy and precomputes the
/// partial-fraction weights; evaluation is then O(|serving| * |interferers|).
/// Immutable and safe to share between threads.
class OutageModel {
 public:
  explicit OutageModel(const LinkQuery& link, ConditioningPolicy policy = {});

  OutageResult evaluate(double threshold) const;
  double operator()(double threshold) const { return evaluate(threshold).probability; }

  /// No interference and no noise: the outage is 0 at every finite threshold.
  bool outage_free() const noexcept { return interferers_.empty() && noise_power_ == 0.0; }

  const ConditioningReport& separation_report() const noexcept { return separation_; }
  const ConditioningPolicy& policy() const noexcept { return policy_; }
  std::span<const double> serving() const noexcept { return serving_; }
  std::span<const double> interferers() const noexcept { return interferers_; }
  double noise_power() const noexcept { return noise_power_; }

  /// Seed used by the Monte-Carlo fallback; a hash of the separated powers
  /// and the noise power.
  std::uint64_t fallback_seed() const noexcept { return fallback_seed_; }

 private:
  struct Fallback;

  double fallback_probability(double threshold) const;

  std::vector<double> serving_;
  std::vector<double> interferers_;
  double noise_power_ = 0.0;
  std::vector<double> log_weight_;  // log |prod_{j!=n} P_n / (P_n - P_j)|
  std::vector<double> weight_sign_;
  ConditioningPolicy policy_;
  ConditioningReport separation_;
  std::uint64_t fallback_seed_ = 0;
  std::shared_ptr<Fallback> fallback_;
};

OutageResult outage_probability(const OutageQuery& query, const ConditioningPolicy& policy = {});

struct CapacityCdf {
  std::vector<double> probabilities;
  ConditioningReport report;
};

/// P(log2(1 + SINR) <= R) for each rate R of a non-decreasing grid.
CapacityCdf capacity_cdf(const OutageModel& model, std::span<const double> rate_grid);
CapacityCdf capacity_cdf(const LinkQuery& link, std::span<const double> rate_grid,
                         const ConditioningPolicy& policy = {});

}  // namespace comp
