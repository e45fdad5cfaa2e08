#include "comp/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>

#include "comp/montecarlo.hpp"
#include "comp/rng.hpp"

namespace comp {

using nlohmann::json;

std::string to_string(CriterionMode mode) {
  switch (mode) {
    case CriterionMode::goodput: return "goodput";
    case CriterionMode::fixed_outage: return "fixed_outage";
    case CriterionMode::both: return "both";
  }
  return "both";
}

CriterionMode criterion_mode_from_string(const std::string& s) {
  if (s == "goodput") return CriterionMode::goodput;
  if (s == "fixed_outage") return CriterionMode::fixed_outage;
  if (s == "both") return CriterionMode::both;
  throw std::invalid_argument("unknown criterion '" + s + "' (goodput, fixed_outage, both)");
}

void ExperimentConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  positive(density_per_km2, "density_per_km2");
  positive(area_width_m, "area_width_m");
  positive(area_height_m, "area_height_m");
  positive(central_width_m, "central_width_m");
  positive(central_height_m, "central_height_m");
  positive(tx_power_w, "tx_power_w");
  if (central_width_m > area_width_m || central_height_m > area_height_m)
    throw std::invalid_argument("central region must fit inside the deployment area");
  propagation.validate();
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power))
    throw std::invalid_argument("noise_power must be finite and non-negative");
  if (n_users == 0) throw std::invalid_argument("n_users must be at least 1");
  if (n_max == 0) throw std::invalid_argument("n_max must be at least 1");
  if (mc_samples == 0) throw std::invalid_argument("mc_samples must be at least 1");
  if (rate_points < 2) throw std::invalid_argument("rate_points must be at least 2");
  if (fig1_user >= n_users) throw std::invalid_argument("fig1_user must be below n_users");
  for (double p : outage_targets)
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("outage targets must lie in (0, 1)");
  if (criterion != CriterionMode::goodput && outage_targets.empty())
    throw std::invalid_argument("fixed_outage criterion needs at least one outage target");
  search.validate();
  if (!(conditioning.min_relative_gap > 0.0 && conditioning.min_relative_gap < 1.0))
    throw std::invalid_argument("conditioning.min_relative_gap must lie in (0, 1)");
  if (!(conditioning.cancellation_limit > 1.0))
    throw std::invalid_argument("conditioning.cancellation_limit must exceed 1");
  if (conditioning.fallback_samples == 0)
    throw std::invalid_argument("conditioning.fallback_samples must be at least 1");
  if (threads < 0) throw std::invalid_argument("threads must be non-negative");
}

Region ExperimentConfig::area() const { return Region{{0.0, 0.0}, area_width_m, area_height_m}; }

Region ExperimentConfig::central() const { return area().centered(central_width_m, central_height_m); }

std::vector<SelectionCriterion> ExperimentConfig::criteria() const {
  std::vector<SelectionCriterion> out;
  if (criterion != CriterionMode::fixed_outage) out.push_back(SelectionCriterion::goodput());
  if (criterion != CriterionMode::goodput)
    for (double p : outage_targets) out.push_back(SelectionCriterion::fixed_outage(p));
  return out;
}

// Config JSON ---------------------------------------------------------------

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be a JSON object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("unknown config key '" + (where.empty() ? "" : where + ".") +
                                  it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["deployment"] = {{"density_per_km2", c.density_per_km2},
                     {"area_width_m", c.area_width_m},
                     {"area_height_m", c.area_height_m},
                     {"central_width_m", c.central_width_m},
                     {"central_height_m", c.central_height_m},
                     {"count_mode", to_string(c.count_mode)},
                     {"tx_power_w", c.tx_power_w},
                     {"file", c.deployment_file ? json(*c.deployment_file) : json(nullptr)}};
  j["propagation"] = to_json(c.propagation);
  j["noise_power"] = c.noise_power;
  j["n_users"] = c.n_users;
  j["n_max"] = c.n_max;
  j["mc_samples"] = c.mc_samples;
  j["rate_points"] = c.rate_points;
  j["fig1_user"] = c.fig1_user;
  j["outage_targets"] = c.outage_targets;
  j["criterion"] = to_string(c.criterion);
  j["seeds"] = {{"deployment", c.seeds.deployment},
                {"users", c.seeds.users},
                {"shadowing", c.seeds.shadowing},
                {"monte_carlo", c.seeds.monte_carlo}};
  j["search"] = {{"gamma_lo", c.search.gamma_lo},
                 {"gamma_hi", c.search.gamma_hi},
                 {"grid_points", c.search.grid_points},
                 {"relative_tolerance", c.search.relative_tolerance}};
  j["conditioning"] = {{"min_relative_gap", c.conditioning.min_relative_gap},
                       {"allow_perturbation", c.conditioning.allow_perturbation},
                       {"cancellation_limit", c.conditioning.cancellation_limit},
                       {"allow_fallback", c.conditioning.allow_fallback},
                       {"fallback_samples", c.conditioning.fallback_samples}};
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    reject_unknown(j,
                   {"deployment", "propagation", "noise_power", "n_users", "n_max", "mc_samples",
                    "rate_points", "fig1_user", "outage_targets", "criterion", "seeds", "search",
                    "conditioning", "threads"},
                   "");
    if (j.contains("deployment")) {
      const json& d = j.at("deployment");
      reject_unknown(d,
                     {"density_per_km2", "area_width_m", "area_height_m", "central_width_m",
                      "central_height_m", "count_mode", "tx_power_w", "file"},
                     "deployment");
      read(d, "density_per_km2", c.density_per_km2);
      read(d, "area_width_m", c.area_width_m);
      read(d, "area_height_m", c.area_height_m);
      read(d, "central_width_m", c.central_width_m);
      read(d, "central_height_m", c.central_height_m);
      if (d.contains("count_mode"))
        c.count_mode = count_mode_from_string(d.at("count_mode").get<std::string>());
      read(d, "tx_power_w", c.tx_power_w);
      if (d.contains("file") && !d.at("file").is_null())
        c.deployment_file = d.at("file").get<std::string>();
    }
    if (j.contains("propagation")) {
      reject_unknown(j.at("propagation"),
                     {"pathloss_intercept_db", "pathloss_slope_db", "shadowing_stddev_db",
                      "min_distance_m"},
                     "propagation");
      c.propagation = propagation_from_json(j.at("propagation"));
    }
    read(j, "noise_power", c.noise_power);
    read(j, "n_users", c.n_users);
    read(j, "n_max", c.n_max);
    read(j, "mc_samples", c.mc_samples);
    read(j, "rate_points", c.rate_points);
    read(j, "fig1_user", c.fig1_user);
    read(j, "outage_targets", c.outage_targets);
    if (j.contains("criterion"))
      c.criterion = criterion_mode_from_string(j.at("criterion").get<std::string>());
    if (j.contains("seeds")) {
      const json& s = j.at("seeds");
      reject_unknown(s, {"deployment", "users", "shadowing", "monte_carlo"}, "seeds");
      read(s, "deployment", c.seeds.deployment);
      read(s, "users", c.seeds.users);
      read(s, "shadowing", c.seeds.shadowing);
      read(s, "monte_carlo", c.seeds.monte_carlo);
    }
    if (j.contains("search")) {
      const json& s = j.at("search");
      reject_unknown(s, {"gamma_lo", "gamma_hi", "grid_points", "relative_tolerance"}, "search");
      read(s, "gamma_lo", c.search.gamma_lo);
      read(s, "gamma_hi", c.search.gamma_hi);
      read(s, "grid_points", c.search.grid_points);
      read(s, "relative_tolerance", c.search.relative_tolerance);
    }
    if (j.contains("conditioning")) {
      const json& s = j.at("conditioning");
      reject_unknown(s,
                     {"min_relative_gap", "allow_perturbation", "cancellation_limit",
                      "allow_fallback", "fallback_samples"},
                     "conditioning");
      read(s, "min_relative_gap", c.conditioning.min_relative_gap);
      read(s, "allow_perturbation", c.conditioning.allow_perturbation);
      read(s, "cancellation_limit", c.conditioning.cancellation_limit);
      read(s, "allow_fallback", c.conditioning.allow_fallback);
      read(s, "fallback_samples", c.conditioning.fallback_samples);
    }
    read(j, "threads", c.threads);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// Deployment and users ---------------------------------------------------------

DeploymentDocument make_deployment(const ExperimentConfig& config) {
  if (config.deployment_file) {
    DeploymentDocument doc = load_deployment(*config.deployment_file);
    // The propagation model of the experiment wins over the stored one.
    doc.propagation = config.propagation;
    return doc;
  }
  return {generate_deployment(config.density_per_km2, config.area(), config.seeds.deployment,
                              config.count_mode, config.tx_power_w),
          config.propagation};
}

UserContext make_user(const ExperimentConfig& config, const DeploymentDocument& deployment,
                      std::size_t index) {
  Region central = config.central();
  if (config.deployment_file) {
    // Center the user region on whatever area the file describes.
    central = deployment.deployment.area.centered(
        std::min(config.central_width_m, deployment.deployment.area.width_m),
        std::min(config.central_height_m, deployment.deployment.area.height_m));
  }
  const Point pos = sample_position(central, rng::derive(config.seeds.users, index));
  return {index, compute_profile(deployment.deployment, deployment.propagation, pos,
                                 rng::derive(config.seeds.shadowing, index))};
}

std::string conditioning_flags(const ConditioningReport& report) {
  std::string s;
  if (report.perturbed) s = "perturbed";
  if (report.fell_back_to_oracle) s += s.empty() ? "fallback" : "+fallback";
  return s.empty() ? "ok" : s;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json report_json(const ConditioningReport& r) {
  return {{"min_relative_gap", r.min_relative_gap},
          {"perturbed", r.perturbed},
          {"fell_back_to_oracle", r.fell_back_to_oracle},
          {"cancellation_ratio", r.cancellation_ratio}};
}

// Sets the OpenMP thread count for one scope.
class ThreadScope {
 public:
  explicit ThreadScope(int threads) : previous_(omp_get_max_threads()) {
    if (threads > 0) omp_set_num_threads(threads);
  }
  ~ThreadScope() { omp_set_num_threads(previous_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int previous_;
};

// Rate at which even the largest serving set is in outage 99.9% of the time.
double fig1_max_rate(const OutageModel& widest) {
  try {
    return threshold_to_rate(capacity_at_fixed_outage(widest, 0.999).gamma_o);
  } catch (const NoSolutionError&) {
    return threshold_to_rate(1e6);  // outage-free or nearly so
  }
}

}  // namespace

// Capacity CDF curves ------------------------------------------------------------

Fig1Result run_fig1_profile(const ExperimentConfig& config, const ReceivedPowerProfile& profile,
                            std::size_t user_index) {
  config.validate();
  ThreadScope threads(config.threads);
  const std::vector<double> powers = profile.powers();
  if (powers.empty()) throw std::invalid_argument("profile has no stations");
  const std::size_t k_max = std::min(config.n_max, powers.size());

  Fig1Result res;
  res.user_index = user_index;
  res.user_position = profile.user_position;
  res.mc_seed = rng::derive(config.seeds.monte_carlo, user_index);
  res.mc_samples = config.mc_samples;

  std::vector<OutageModel> models;
  models.reserve(k_max);
  for (std::size_t k = 1; k <= k_max; ++k)
    models.emplace_back(nested_link(powers, k, config.noise_power), config.conditioning);

  const double r_max = fig1_max_rate(models.back());
  res.rates.resize(config.rate_points);
  for (std::size_t i = 0; i < config.rate_points; ++i)
    res.rates[i] = r_max * static_cast<double>(i) / static_cast<double>(config.rate_points - 1);

  const NestedSinrSamples samples =
      sample_nested_sinr(powers, config.noise_power, k_max, res.mc_seed, config.mc_samples);

  for (std::size_t k = 1; k <= k_max; ++k) {
    const OutageModel& m = models[k - 1];
    Fig1Curve curve;
    curve.set_size = k;
    curve.report = m.separation_report();
    curve.analytic.reserve(res.rates.size());
    for (double r : res.rates) {
      const OutageResult o = m.evaluate(rate_to_threshold(r));
      curve.analytic.push_back(o.probability);
      curve.reports.push_back(o.report);
      curve.report.merge(o.report);
    }
    const auto sk = samples.for_set_size(k);
    curve.empirical =
        empirical_capacity_cdf(EmpiricalCdf(std::vector<double>(sk.begin(), sk.end())), res.rates);
    for (std::size_t i = 0; i < res.rates.size(); ++i)
      curve.max_gap = std::max(curve.max_gap, std::abs(curve.analytic[i] - curve.empirical[i]));
    res.curves.push_back(std::move(curve));
  }
  return res;
}

Fig1Result run_fig1(const ExperimentConfig& config, const DeploymentDocument& deployment) {
  config.validate();
  const UserContext user = make_user(config, deployment, config.fig1_user);
  return run_fig1_profile(config, user.profile, user.index);
}

void write_fig1_csv(std::ostream& out, const Fig1Result& result) {
  out << "rate";
  for (const auto& c : result.curves) out << ",analytic_cdf_N" << c.set_size;
  for (const auto& c : result.curves) out << ",empirical_cdf_N" << c.set_size;
  for (const auto& c : result.curves) out << ",flags_N" << c.set_size;
  out << '\n';
  for (std::size_t i = 0; i < result.rates.size(); ++i) {
    out << format_number(result.rates[i]);
    for (const auto& c : result.curves) out << ',' << format_number(c.analytic[i]);
    for (const auto& c : result.curves) out << ',' << format_number(c.empirical[i]);
    for (const auto& c : result.curves) out << ',' << conditioning_flags(c.reports[i]);
    out << '\n';
  }
}

json fig1_summary(const Fig1Result& result) {
  json curves = json::array();
  double worst = 0.0;
  for (const auto& c : result.curves) {
    curves.push_back({{"set_size", c.set_size},
                      {"max_abs_gap", c.max_gap},
                      {"conditioning", report_json(c.report)}});
    worst = std::max(worst, c.max_gap);
  }
  return {{"user", result.user_index},
          {"user_position", {{"x", result.user_position.x}, {"y", result.user_position.y}}},
          {"mc_seed", result.mc_seed},
          {"mc_samples", result.mc_samples},
          {"rate_points", result.rates.size()},
          {"max_rate", result.rates.empty() ? 0.0 : result.rates.back()},
          {"max_abs_gap", worst},
          {"curves", std::move(curves)}};
}

// Cooperating-set histograms ---------------------------------------------------------

Fig2Result run_fig2(const ExperimentConfig& config, const DeploymentDocument& deployment) {
  config.validate();
  ThreadScope threads(config.threads);
  const std::vector<SelectionCriterion> criteria = config.criteria();
  const std::size_t n_users = config.n_users;
  const std::size_t n_crit = criteria.size();

  struct Slot {
    bool ok = false;
    std::string error;
    ResultRow row;
  };
  std::vector<Slot> slots(n_crit * n_users);  // criterion-major
  std::exception_ptr conditioning_failure;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t u = 0; u < n_users; ++u) {
    try {
      const UserContext user = make_user(config, deployment, u);
      const std::vector<double> powers = user.profile.powers();
      const std::size_t k_max = std::min(config.n_max, powers.size());
      std::vector<OutageModel> models;
      models.reserve(k_max);
      for (std::size_t k = 1; k <= k_max; ++k)
        models.emplace_back(nested_link(powers, k, config.noise_power), config.conditioning);

      for (std::size_t c = 0; c < n_crit; ++c) {
        Slot& slot = slots[c * n_users + u];
        slot.row.user = u;
        slot.row.target = criteria[c].label();
        try {
          const SetSelection sel = select_best_set(models, criteria[c], config.search);
          slot.row.n_star = sel.set_size;
          slot.row.gamma_star = sel.per_candidate_scores[sel.set_size - 1].gamma;
          for (const CandidateScore& s : sel.per_candidate_scores) {
            slot.row.goodput.push_back(s.goodput);
            slot.row.spectral_efficiency.push_back(s.spectral_efficiency);
            slot.row.report.merge(s.report);
          }
          slot.ok = true;
        } catch (const ConditioningError&) {
          throw;
        } catch (const std::exception& e) {
          slot.error = e.what();
        }
      }
    } catch (const ConditioningError&) {
#pragma omp critical(comp_fig2_error)
      if (!conditioning_failure) conditioning_failure = std::current_exception();
    } catch (const std::exception& e) {
      for (std::size_t c = 0; c < n_crit; ++c) slots[c * n_users + u].error = e.what();
    }
  }
  if (conditioning_failure) std::rethrow_exception(conditioning_failure);

  Fig2Result res;
  res.n_max = config.n_max;
  for (std::size_t c = 0; c < n_crit; ++c) {
    Fig2Histogram h;
    h.target = criteria[c].label();
    std::vector<std::size_t> counts(config.n_max, 0);
    double sum_n = 0.0;
    for (std::size_t u = 0; u < n_users; ++u) {
      Slot& slot = slots[c * n_users + u];
      if (!slot.ok) {
        ++res.failures;
        res.failure_messages.push_back("user " + std::to_string(u) + " [" + h.target +
                                       "]: " + slot.error);
        continue;
      }
      ++counts[slot.row.n_star - 1];
      sum_n += static_cast<double>(slot.row.n_star);
      ++h.users;
      res.rows.push_back(std::move(slot.row));
    }
    h.fractions.assign(config.n_max, 0.0);
    if (h.users > 0) {
      for (std::size_t k = 0; k < config.n_max; ++k)
        h.fractions[k] = static_cast<double>(counts[k]) / static_cast<double>(h.users);
      h.mean_n_star = sum_n / static_cast<double>(h.users);
    }
    res.histograms.push_back(std::move(h));
  }
  return res;
}

void write_fig2_csv(std::ostream& out, const Fig2Result& result) {
  out << "target,n_star,fraction_of_users\n";
  for (const auto& h : result.histograms)
    for (std::size_t k = 0; k < h.fractions.size(); ++k)
      out << h.target << ',' << k + 1 << ',' << format_number(h.fractions[k]) << '\n';
}

void write_fig2_users_csv(std::ostream& out, const Fig2Result& result) {
  out << "user,target,n_star,gamma_star";
  for (std::size_t k = 1; k <= result.n_max; ++k) out << ",goodput_N" << k;
  for (std::size_t k = 1; k <= result.n_max; ++k) out << ",spectral_efficiency_N" << k;
  out << ",flags\n";
  for (const ResultRow& r : result.rows) {
    out << r.user << ',' << r.target << ',' << r.n_star << ',' << format_number(r.gamma_star);
    // Users with fewer stations than n_max leave the tail empty.
    for (std::size_t k = 0; k < result.n_max; ++k)
      out << ',' << (k < r.goodput.size() ? format_number(r.goodput[k]) : "");
    for (std::size_t k = 0; k < result.n_max; ++k)
      out << ',' << (k < r.spectral_efficiency.size() ? format_number(r.spectral_efficiency[k]) : "");
    out << ',' << conditioning_flags(r.report) << '\n';
  }
}

json fig2_summary(const Fig2Result& result) {
  json hist = json::array();
  for (const auto& h : result.histograms)
    hist.push_back({{"target", h.target},
                    {"users", h.users},
                    {"fractions", h.fractions},
                    {"mean_n_star", h.mean_n_star}});
  std::size_t perturbed = 0, fallback = 0;
  for (const ResultRow& r : result.rows) {
    perturbed += r.report.perturbed;
    fallback += r.report.fell_back_to_oracle;
  }
  return {{"n_max", result.n_max},
          {"histograms", std::move(hist)},
          {"failures", result.failures},
          {"failure_messages", result.failure_messages},
          {"rows_perturbed", perturbed},
          {"rows_with_fallback", fallback}};
}

}  // namespace comp
