#include "comp/optimize.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace comp {

void SearchBounds::validate() const {
  if (!(gamma_lo > 0.0) || !(gamma_hi > gamma_lo) || !std::isfinite(gamma_hi))
    throw std::invalid_argument("goodput search needs 0 < gamma_lo < gamma_hi < inf");
  if (grid_points < 3) throw std::invalid_argument("goodput search needs at least 3 grid points");
  if (!(relative_tolerance > 0.0)) throw std::invalid_argument("relative_tolerance must be positive");
}

namespace {

struct Probe {
  double gamma = 0.0;
  double outage = 0.0;
  double goodput = -1.0;
};

}  // namespace

RateOptimum maximize_goodput(const OutageModel& model, const SearchBounds& bounds) {
  bounds.validate();
  RateOptimum best_result;
  best_result.report = model.separation_report();

  if (model.outage_free()) {
    best_result.gamma_star = bounds.gamma_hi;
    best_result.rate_star = threshold_to_rate(bounds.gamma_hi);
    best_result.goodput = best_result.rate_star;
    best_result.saturated = true;
    return best_result;
  }

  Probe best;
  auto probe = [&](double gamma) {
    const OutageResult r = model.evaluate(gamma);
    best_result.report.merge(r.report);
    Probe p{gamma, r.probability, threshold_to_rate(gamma) * (1.0 - r.probability)};
    if (p.goodput > best.goodput) best = p;
    return p.goodput;
  };

  // Coarse grid in log(gamma).
  const double t_lo = std::log(bounds.gamma_lo);
  const double t_hi = std::log(bounds.gamma_hi);
  const std::size_t n = bounds.grid_points;
  const double step = (t_hi - t_lo) / static_cast<double>(n - 1);
  auto grid_gamma = [&](std::size_t i) {
    if (i == 0) return bounds.gamma_lo;
    if (i == n - 1) return bounds.gamma_hi;
    return std::exp(t_lo + step * static_cast<double>(i));
  };
  std::size_t best_index = 0;
  double best_grid = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = probe(grid_gamma(i));
    if (g > best_grid) {
      best_grid = g;
      best_index = i;
    }
  }
  if (!(best_grid > 0.0))
    throw SearchBoundsError("goodput is zero over the whole search interval (outage saturates)");

  // Golden-section refinement inside the neighbouring grid cells.
  double a = std::log(grid_gamma(best_index == 0 ? 0 : best_index - 1));
  double b = std::log(grid_gamma(best_index + 1 == n ? n - 1 : best_index + 1));
  const double width = std::log1p(bounds.relative_tolerance);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = probe(std::exp(c));
  double fd = probe(std::exp(d));
  while (b - a > width) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = probe(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = probe(std::exp(d));
    }
  }

  best_result.gamma_star = best.gamma;
  best_result.rate_star = threshold_to_rate(best.gamma);
  best_result.outage_at_optimum = best.outage;
  best_result.goodput = best_result.rate_star * (1.0 - best.outage);
  return best_result;
}

RateOptimum maximize_goodput(const LinkQuery& link, const SearchBounds& bounds,
                             const ConditioningPolicy& policy) {
  return maximize_goodput(OutageModel(link, policy), bounds);
}

FixedOutageCapacity capacity_at_fixed_outage(const OutageModel& model, double p_o,
                                             double gamma_cap) {
  if (!(p_o > 0.0 && p_o < 1.0)) throw std::invalid_argument("outage target must be in (0, 1)");
  if (!(gamma_cap > 0.0)) throw std::invalid_argument("gamma_cap must be positive");
  if (model.outage_free())
    throw NoSolutionError("outage is identically zero: no threshold reaches the target");

  FixedOutageCapacity out;
  out.report = model.separation_report();
  auto outage = [&](double gamma) {
    const OutageResult r = model.evaluate(gamma);
    out.report.merge(r.report);
    return r.probability;
  };

  // Bracket [lo, hi] with P(lo) < p_o <= P(hi).
  double lo = 0.0;
  double hi = std::min(1.0, gamma_cap);
  double p_hi = outage(hi);
  while (p_hi < p_o) {
    if (hi >= gamma_cap)
      throw NoSolutionError("outage stays below the target up to the search cap");
    lo = hi;
    hi = std::min(hi * 4.0, gamma_cap);
    p_hi = outage(hi);
  }

  double best_gamma = hi;
  double best_err = std::abs(p_hi - p_o);
  for (int iter = 0; iter < 300 && best_err > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double p = outage(mid);
    if (std::abs(p - p_o) < best_err) {
      best_err = std::abs(p - p_o);
      best_gamma = mid;
    }
    if (p < p_o)
      lo = mid;
    else
      hi = mid;
  }

  out.gamma_o = best_gamma;
  out.outage = outage(best_gamma);
  out.capacity = threshold_to_rate(best_gamma) * (1.0 - p_o);
  return out;
}

FixedOutageCapacity capacity_at_fixed_outage(const LinkQuery& link, double p_o,
                                             const ConditioningPolicy& policy, double gamma_cap) {
  return capacity_at_fixed_outage(OutageModel(link, policy), p_o, gamma_cap);
}

std::string SelectionCriterion::label() const {
  if (kind == Kind::goodput) return "goodput";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", outage_target);
  return buf;
}

CandidateScore score_candidate(const OutageModel& model, const SelectionCriterion& criterion,
                               const SearchBounds& bounds) {
  CandidateScore s;
  s.set_size = model.serving().size();
  if (criterion.kind == SelectionCriterion::Kind::goodput) {
    const RateOptimum r = maximize_goodput(model, bounds);
    s.goodput = r.goodput;
    s.gamma = r.gamma_star;
    s.outage = r.outage_at_optimum;
    s.saturated = r.saturated;
    s.report = r.report;
  } else {
    const FixedOutageCapacity c = capacity_at_fixed_outage(model, criterion.outage_target);
    s.goodput = c.capacity;
    s.gamma = c.gamma_o;
    s.outage = c.outage;
    s.report = c.report;
  }
  s.spectral_efficiency = s.goodput / static_cast<double>(s.set_size);
  return s;
}

SetSelection select_best_set(std::span<const OutageModel> candidates,
                             const SelectionCriterion& criterion, const SearchBounds& bounds) {
  if (candidates.empty()) throw std::invalid_argument("no candidate sets");
  SetSelection sel;
  sel.per_candidate_scores.reserve(candidates.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].serving().size() != i + 1)
      throw std::invalid_argument("candidate sets must be nested by size 1..n");
    sel.per_candidate_scores.push_back(score_candidate(candidates[i], criterion, bounds));
    const double se = sel.per_candidate_scores.back().spectral_efficiency;
    const double best_se = sel.per_candidate_scores[best].spectral_efficiency;
    if (se > best_se + 1e-12 * std::abs(best_se)) best = i;
  }

  const CandidateScore& chosen = sel.per_candidate_scores[best];
  sel.set_size = chosen.set_size;
  sel.goodput = chosen.goodput;
  sel.per_bs_spectral_efficiency = chosen.spectral_efficiency;
  sel.chosen_set.resize(sel.set_size);
  for (std::size_t i = 0; i < sel.set_size; ++i) sel.chosen_set[i] = i;
  return sel;
}

SetSelection select_best_set(std::span<const double> candidate_powers_desc, std::size_t n_max,
                             const SelectionCriterion& criterion, double noise_power,
                             const SearchBounds& bounds, const ConditioningPolicy& policy) {
  if (candidate_powers_desc.empty()) throw std::invalid_argument("no candidate stations");
  if (n_max == 0) throw std::invalid_argument("n_max must be at least 1");
  for (std::size_t i = 1; i < candidate_powers_desc.size(); ++i)
    if (candidate_powers_desc[i] > candidate_powers_desc[i - 1])
      throw std::invalid_argument("candidate powers must be sorted in descending order");

  const std::size_t k_max = std::min(n_max, candidate_powers_desc.size());
  std::vector<OutageModel> models;
  models.reserve(k_max);
  for (std::size_t k = 1; k <= k_max; ++k)
    models.emplace_back(nested_link(candidate_powers_desc, k, noise_power), policy);
  return select_best_set(models, criterion, bounds);
}

}  // namespace comp
