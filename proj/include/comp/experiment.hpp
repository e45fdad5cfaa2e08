#pragma once

// Experiment runner behind the command-line tool: capacity CDF curves for
// one user (analytic vs Monte-Carlo) and the distribution of the chosen
// number of cooperating stations over many users.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "comp/analytic.hpp"
#include "comp/network.hpp"
#include "comp/optimize.hpp"
#include "comp/serialization.hpp"

namespace comp {

enum class CriterionMode { goodput, fixed_outage, both };

std::string to_string(CriterionMode mode);
CriterionMode criterion_mode_from_string(const std::string& s);

struct ExperimentSeeds {
  std::uint64_t deployment = 1;
  std::uint64_t users = 2;
  std::uint64_t shadowing = 3;
  std::uint64_t monte_carlo = 4;
};

struct ExperimentConfig {
  double density_per_km2 = 100.0;
  double area_width_m = 3000.0;
  double area_height_m = 3000.0;
  double central_width_m = 1000.0;  // users are placed only here
  double central_height_m = 1000.0;
  CountMode count_mode = CountMode::exact;
  double tx_power_w = 1.0;
  PropagationParams propagation;
  double noise_power = 0.0;

  std::size_t n_users = 500;
  std::size_t n_max = 8;
  std::size_t mc_samples = 1'000'000;
  std::size_t rate_points = 64;
  std::size_t fig1_user = 0;
  std::vector<double> outage_targets{0.01, 0.05, 0.1, 0.2, 0.5};
  CriterionMode criterion = CriterionMode::both;

  ExperimentSeeds seeds;
  SearchBounds search;
  ConditioningPolicy conditioning;
  int threads = 0;  // 0: OpenMP default
  std::optional<std::string> deployment_file;

  void validate() const;
  Region area() const;
  Region central() const;
  std::vector<SelectionCriterion> criteria() const;
};

nlohmann::json to_json(const ExperimentConfig& config);
/// Keys missing from `j` keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The configured deployment: loaded from deployment_file, or generated.
DeploymentDocument make_deployment(const ExperimentConfig& config);

struct UserContext {
  std::size_t index = 0;
  ReceivedPowerProfile profile;
};

/// User `index`: uniform in the central region, with its own shadowing draws.
UserContext make_user(const ExperimentConfig& config, const DeploymentDocument& deployment,
                      std::size_t index);

/// Flag string for CSV sidecar columns: "ok", or '+'-joined
/// "perturbed" / "fallback".
std::string conditioning_flags(const ConditioningReport& report);

struct Fig1Curve {
  std::size_t set_size = 0;
  std::vector<double> analytic;
  std::vector<double> empirical;
  std::vector<ConditioningReport> reports;  // per rate
  ConditioningReport report;                // merged
  double max_gap = 0.0;
};

struct Fig1Result {
  std::size_t user_index = 0;
  Point user_position;
  std::uint64_t mc_seed = 0;
  std::size_t mc_samples = 0;
  std::vector<double> rates;
  std::vector<Fig1Curve> curves;  // K = 1..n_max
};

Fig1Result run_fig1(const ExperimentConfig& config, const DeploymentDocument& deployment);
/// Same, for an arbitrary received power profile (strongest first).
Fig1Result run_fig1_profile(const ExperimentConfig& config, const ReceivedPowerProfile& profile,
                            std::size_t user_index);
void write_fig1_csv(std::ostream& out, const Fig1Result& result);
nlohmann::json fig1_summary(const Fig1Result& result);

/// One user under one criterion.
struct ResultRow {
  std::size_t user = 0;
  std::string target;  // "goodput" or the outage target
  std::size_t n_star = 0;
  double gamma_star = 0.0;
  std::vector<double> goodput;              // per K
  std::vector<double> spectral_efficiency;  // per K
  ConditioningReport report;
};

struct Fig2Histogram {
  std::string target;
  std::size_t users = 0;           // successful users
  std::vector<double> fractions;   // index N* - 1
  double mean_n_star = 0.0;
};

struct Fig2Result {
  std::vector<ResultRow> rows;  // ordered by criterion, then user
  std::vector<Fig2Histogram> histograms;
  std::size_t n_max = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;
};

Fig2Result run_fig2(const ExperimentConfig& config, const DeploymentDocument& deployment);
void write_fig2_csv(std::ostream& out, const Fig2Result& result);
void write_fig2_users_csv(std::ostream& out, const Fig2Result& result);
nlohmann::json fig2_summary(const Fig2Result& result);

/// Formats a double for CSV output (round-trip precision).
std::string format_number(double v);

}  // namespace comp
