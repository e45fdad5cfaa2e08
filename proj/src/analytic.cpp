#include "comp/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "comp/montecarlo.hpp"
#include "comp/rng.hpp"
#include "comp/summation.hpp"

namespace comp {

namespace {

void check_policy(const ConditioningPolicy& policy) {
  if (!(policy.min_relative_gap > 0.0) || !(policy.min_relative_gap < 0.5))
    throw std::invalid_argument("min_relative_gap must be in (0, 0.5)");
  if (!(policy.cancellation_limit >= 1.0))
    throw std::invalid_argument("cancellation_limit must be >= 1");
  if (policy.allow_fallback && policy.fallback_samples == 0)
    throw std::invalid_argument("fallback_samples must be positive");
}

double relative_gap(double larger, double smaller) { return (larger - smaller) / larger; }

struct Weights {
  std::vector<double> log_magnitude;
  std::vector<double> sign;
};

// Partial-fraction weights prod_{j!=n} P_n / (P_n - P_j) as (sign, log|.|).
Weights partial_fraction_weights(std::span<const double> powers) {
  Weights w;
  w.log_magnitude.resize(powers.size());
  w.sign.resize(powers.size());
  for (std::size_t n = 0; n < powers.size(); ++n) {
    CompensatedSum log_sum;
    double sign = 1.0;
    for (std::size_t j = 0; j < powers.size(); ++j) {
      if (j == n) continue;
      const double diff = powers[n] - powers[j];
      if (diff < 0.0) sign = -sign;
      log_sum.add(std::log(powers[n] / std::abs(diff)));
    }
    w.log_magnitude[n] = log_sum.value();
    w.sign[n] = sign;
  }
  return w;
}

struct TermSum {
  double sum = 0.0;
  double max_abs = 0.0;
};

// sum_n sign_n exp(logw_n - g*noise/P_n) prod_k P_n / (P_n + g*P_k)
TermSum success_terms(std::span<const double> serving, std::span<const double> log_weight,
                      std::span<const double> weight_sign, std::span<const double> interferers,
                      double noise_power, double g) {
  CompensatedSum sum;
  double max_abs = 0.0;
  const double* pk = interferers.data();
  const std::size_t m = interferers.size();
  for (std::size_t n = 0; n < serving.size(); ++n) {
    const double pn = serving[n];
    double product = 1.0;
#pragma omp simd reduction(* : product)
    for (std::size_t k = 0; k < m; ++k) product *= pn / (pn + g * pk[k]);
    const double log_term = log_weight[n] - g * noise_power / pn + std::log(product);
    const double term = weight_sign[n] * std::exp(log_term);
    sum.add(term);
    max_abs = std::max(max_abs, std::abs(term));
  }
  return {sum.value(), max_abs};
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

void ConditioningReport::merge(const ConditioningReport& other) noexcept {
  min_relative_gap = std::min(min_relative_gap, other.min_relative_gap);
  perturbed = perturbed || other.perturbed;
  fell_back_to_oracle = fell_back_to_oracle || other.fell_back_to_oracle;
  cancellation_ratio = std::max(cancellation_ratio, other.cancellation_ratio);
}

double min_relative_gap(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end(), std::greater<>());
  double gap = 1.0;
  for (std::size_t i = 1; i < all.size(); ++i) gap = std::min(gap, relative_gap(all[i - 1], all[i]));
  return gap;
}

SeparatedPowers separate_powers(std::span<const double> serving,
                                std::span<const double> interferers,
                                const ConditioningPolicy& policy) {
  check_policy(policy);
  struct Item {
    double value;
    std::size_t slot;  // < serving.size() for serving powers
  };
  std::vector<Item> items;
  items.reserve(serving.size() + interferers.size());
  for (std::size_t i = 0; i < serving.size(); ++i) items.push_back({serving[i], i});
  for (std::size_t i = 0; i < interferers.size(); ++i)
    items.push_back({interferers[i], serving.size() + i});
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.value > b.value; });

  SeparatedPowers out;
  const double step = policy.min_relative_gap;
  for (std::size_t i = 1; i < items.size(); ++i) {
    const double larger = items[i - 1].value;
    double gap = relative_gap(larger, items[i].value);
    if (gap < step) {
      if (!policy.allow_perturbation)
        throw DegeneratePowersError("received powers " + std::to_string(larger) + " and " +
                                    std::to_string(items[i].value) +
                                    " violate the minimum relative gap");
      const double original = items[i].value;
      double value = original;
      for (std::size_t k = 1; gap < step; ++k) {
        if (static_cast<double>(k) * step >= 1.0)
          throw DegeneratePowersError("cannot separate received powers");
        value = original * (1.0 - static_cast<double>(k) * step);
        gap = relative_gap(larger, value);
      }
      items[i].value = value;
      out.perturbed = true;
    }
    out.min_relative_gap = std::min(out.min_relative_gap, gap);
  }

  out.serving.resize(serving.size());
  out.interferers.resize(interferers.size());
  for (const Item& item : items) {
    if (item.slot < serving.size())
      out.serving[item.slot] = item.value;
    else
      out.interferers[item.slot - serving.size()] = item.value;
  }
  return out;
}

double partial_fraction_sum(std::span<const double> powers) {
  const Weights w = partial_fraction_weights(powers);
  CompensatedSum sum;
  for (std::size_t n = 0; n < powers.size(); ++n) sum.add(w.sign[n] * std::exp(w.log_magnitude[n]));
  return sum.value();
}

double gen_chi2_ccdf(const PowerSet& powers, double x, const ConditioningPolicy& policy) {
  if (powers.empty()) throw std::invalid_argument("power set must not be empty");
  if (!(x >= 0.0) || std::isnan(x)) throw std::invalid_argument("x must be non-negative");
  const SeparatedPowers sep = separate_powers(powers.values(), {}, policy);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const Weights w = partial_fraction_weights(sep.serving);
  return clamp_probability(success_terms(sep.serving, w.log_magnitude, w.sign, {}, x, 1.0).sum);
}

double siso_outage(double serving_power, const PowerSet& interferers, double noise_power,
                   double threshold) {
  if (!(serving_power > 0.0) || !std::isfinite(serving_power))
    throw std::invalid_argument("serving power must be finite and positive");
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power))
    throw std::invalid_argument("noise power must be finite and non-negative");
  if (!(threshold >= 0.0) || !std::isfinite(threshold))
    throw std::invalid_argument("SINR threshold must be finite and non-negative");
  if (threshold == 0.0) return 0.0;
  double success = std::exp(-threshold * noise_power / serving_power);
  for (double pk : interferers.values()) success *= serving_power / (serving_power + threshold * pk);
  return clamp_probability(1.0 - success);
}

struct OutageModel::Fallback {
  std::once_flag once;
  std::vector<double> sorted;
};

OutageModel::OutageModel(const LinkQuery& link, ConditioningPolicy policy)
    : policy_(policy), fallback_(std::make_shared<Fallback>()) {
  link.validate();
  SeparatedPowers sep = separate_powers(link.serving.values(), link.interferers.values(), policy_);
  serving_ = std::move(sep.serving);
  interferers_ = std::move(sep.interferers);
  noise_power_ = link.noise_power;
  separation_.min_relative_gap = sep.min_relative_gap;
  separation_.perturbed = sep.perturbed;

  Weights w = partial_fraction_weights(serving_);
  log_weight_ = std::move(w.log_magnitude);
  weight_sign_ = std::move(w.sign);

  std::uint64_t h = rng::mix64(serving_.size());
  h = rng::hash_values(h, serving_);
  h = rng::hash_values(h, interferers_);
  fallback_seed_ = rng::hash_values(h, std::span<const double>(&noise_power_, 1));
}

OutageResult OutageModel::evaluate(double threshold) const {
  if (!(threshold >= 0.0) || !std::isfinite(threshold))
    throw std::invalid_argument("SINR threshold must be finite and non-negative");
  OutageResult result;
  result.report = separation_;
  if (threshold == 0.0 || outage_free()) return result;

  const TermSum terms =
      success_terms(serving_, log_weight_, weight_sign_, interferers_, noise_power_, threshold);
  double ratio = 0.0;
  if (terms.max_abs > 0.0)
    ratio = terms.sum != 0.0 ? terms.max_abs / std::abs(terms.sum)
                             : std::numeric_limits<double>::infinity();
  result.report.cancellation_ratio = ratio;

  if (ratio > policy_.cancellation_limit || !std::isfinite(terms.sum)) {
    if (!policy_.allow_fallback)
      throw ConditioningError("closed-form cancellation ratio " + std::to_string(ratio) +
                              " exceeds the limit");
    result.report.fell_back_to_oracle = true;
    result.probability = fallback_probability(threshold);
    return result;
  }
  result.probability = clamp_probability(1.0 - terms.sum);
  return result;
}

double OutageModel::fallback_probability(double threshold) const {
  std::call_once(fallback_->once, [this] {
    LinkQuery link{PowerSet(serving_), PowerSet(interferers_), noise_power_};
    std::vector<double> samples = sample_sinr(link, fallback_seed_, policy_.fallback_samples);
    std::sort(samples.begin(), samples.end());
    fallback_->sorted = std::move(samples);
  });
  const auto& s = fallback_->sorted;
  const auto it = std::upper_bound(s.begin(), s.end(), threshold);
  return static_cast<double>(it - s.begin()) / static_cast<double>(s.size());
}

OutageResult outage_probability(const OutageQuery& query, const ConditioningPolicy& policy) {
  query.validate();
  return OutageModel(query.link, policy).evaluate(query.threshold);
}

CapacityCdf capacity_cdf(const OutageModel& model, std::span<const double> rate_grid) {
  CapacityCdf out;
  out.report = model.separation_report();
  out.probabilities.reserve(rate_grid.size());
  for (std::size_t i = 0; i < rate_grid.size(); ++i) {
    if (!(rate_grid[i] >= 0.0)) throw std::invalid_argument("rates must be non-negative");
    if (i > 0 && rate_grid[i] < rate_grid[i - 1])
      throw std::invalid_argument("rate grid must be non-decreasing");
    const OutageResult r = model.evaluate(rate_to_threshold(rate_grid[i]));
    out.report.merge(r.report);
    out.probabilities.push_back(r.probability);
  }
  return out;
}

CapacityCdf capacity_cdf(const LinkQuery& link, std::span<const double> rate_grid,
                         const ConditioningPolicy& policy) {
  return capacity_cdf(OutageModel(link, policy), rate_grid);
}

}  // namespace comp
