// comp: command-line front end.
//
// Exit codes: 0 success, 1 bad input, 2 an invariant check failed,
// 3 the closed form needed its Monte-Carlo fallback under --strict.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "comp/analytic.hpp"
#include "comp/experiment.hpp"
#include "comp/montecarlo.hpp"
#include "comp/rng.hpp"
#include "comp/serialization.hpp"
#include "comp/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInput = 1, kInvariant = 2, kStrict = 3 };

// Thrown by subcommands to leave with a specific code.
struct ExitWith {
  int code;
  std::string message;
};

json report_json(const comp::ConditioningReport& r) {
  return {{"min_relative_gap", r.min_relative_gap},
          {"perturbed", r.perturbed},
          {"fell_back_to_oracle", r.fell_back_to_oracle},
          {"cancellation_ratio", r.cancellation_ratio}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ExitWith{kInput, "cannot write " + path.string()};
  out << text;
}

// Conditioning switches shared by several subcommands.
struct ConditioningFlags {
  bool strict = false;
  bool no_perturb = false;
  std::optional<double> min_gap;
  std::optional<std::size_t> fallback_samples;

  void add(CLI::App* app) {
    app->add_flag("--strict", strict,
                  "Fail with exit code 3 instead of using the Monte-Carlo fallback");
    app->add_flag("--no-perturb", no_perturb,
                  "Reject near-equal powers instead of separating them");
    app->add_option("--min-gap", min_gap, "Minimum relative gap between powers")
        ->check(CLI::PositiveNumber);
    app->add_option("--fallback-samples", fallback_samples, "Samples drawn by the fallback")
        ->check(CLI::PositiveNumber);
  }
  void apply(comp::ConditioningPolicy& p) const {
    if (strict) p.allow_fallback = false;
    if (no_perturb) p.allow_perturbation = false;
    if (min_gap) p.min_relative_gap = *min_gap;
    if (fallback_samples) p.fallback_samples = *fallback_samples;
  }
};

// ---------------------------------------------------------------------------- outage

struct OutageArgs {
  std::vector<double> serving;
  std::vector<double> interferers;
  double noise = 0.0;
  std::optional<double> gamma;
  std::optional<double> rate;
  std::size_t samples = 0;
  std::uint64_t seed = 1;
  bool validate = false;
  ConditioningFlags cond;
};

int run_outage(const OutageArgs& a) {
  if (a.gamma.has_value() == a.rate.has_value())
    throw ExitWith{kInput, "give exactly one of --gamma and --rate"};
  const double gamma = a.gamma ? *a.gamma : comp::rate_to_threshold(*a.rate);
  comp::ConditioningPolicy policy;
  a.cond.apply(policy);
  const comp::OutageQuery q{{comp::PowerSet(a.serving), comp::PowerSet(a.interferers), a.noise},
                            gamma};
  q.validate();
  const comp::OutageResult r = comp::outage_probability(q, policy);

  json out{{"threshold", gamma},
           {"rate", comp::threshold_to_rate(gamma)},
           {"outage_probability", r.probability},
           {"conditioning", report_json(r.report)}};
  int code = kOk;
  const std::size_t samples = a.validate && a.samples == 0 ? 1'000'000 : a.samples;
  if (samples > 0) {
    const auto sinr = comp::sample_sinr(q.link, a.seed, samples);
    const double mc = comp::empirical_outage(sinr, gamma);
    // Five standard errors, floored for probabilities near 0 or 1.
    const double tol = std::max(5.0 * std::sqrt(mc * (1.0 - mc) / samples), 5.0 / samples);
    const double gap = std::abs(mc - r.probability);
    out["monte_carlo"] = {{"samples", samples}, {"seed", a.seed}, {"outage_probability", mc},
                          {"abs_gap", gap},     {"tolerance", tol}, {"agrees", gap <= tol}};
    if (a.validate && gap > tol) code = kInvariant;
  }
  std::cout << out.dump(2) << '\n';
  return code;
}

// ----------------------------------------------------------------------------- experiments

struct ExperimentArgs {
  std::optional<std::string> config;
  std::string out = "out";
  std::optional<int> threads;
  std::optional<std::string> deployment;
  std::optional<std::size_t> users;
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> rate_points;
  std::optional<std::size_t> user;
  std::optional<double> noise;
  std::optional<double> shadowing;
  std::optional<double> density;
  std::optional<std::string> criterion;
  std::optional<std::vector<double>> targets;
  std::optional<std::uint64_t> seed;
  ConditioningFlags cond;

  void add(CLI::App* app, bool fig1) {
    app->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    app->add_option("--out", out, "Output directory")->capture_default_str();
    app->add_option("--threads", threads, "OpenMP threads (0: default)")->check(CLI::NonNegativeNumber);
    app->add_option("--deployment", deployment, "Deployment JSON to reuse")->check(CLI::ExistingFile);
    app->add_option("--n-max", n_max, "Largest cooperating set")->check(CLI::PositiveNumber);
    app->add_option("--noise", noise, "Noise power (W)")->check(CLI::NonNegativeNumber);
    app->add_option("--shadowing", shadowing, "Shadowing std. dev. (dB)")->check(CLI::NonNegativeNumber);
    app->add_option("--density", density, "Stations per km^2")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Base seed; derives the deployment, user, shadowing and sampling seeds");
    if (fig1) {
      app->add_option("--samples", samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);
      app->add_option("--rate-points", rate_points, "Points of the rate grid")->check(CLI::Range(2, 1 << 20));
      app->add_option("--user", user, "Index of the user to plot");
    } else {
      app->add_option("--users", users, "Number of users")->check(CLI::PositiveNumber);
      app->add_option("--criterion", criterion, "goodput, fixed_outage or both")
          ->check(CLI::IsMember({"goodput", "fixed_outage", "both"}));
      app->add_option("--targets", targets, "Outage targets for the fixed-outage criterion")
          ->delimiter(',');
    }
    cond.add(app);
  }

  comp::ExperimentConfig resolve() const {
    comp::ExperimentConfig c = config ? comp::load_config(*config) : comp::ExperimentConfig{};
    if (threads) c.threads = *threads;
    if (deployment) c.deployment_file = fs::absolute(*deployment).string();
    if (users) c.n_users = *users;
    if (n_max) c.n_max = *n_max;
    if (samples) c.mc_samples = *samples;
    if (rate_points) c.rate_points = *rate_points;
    if (user) {
      c.fig1_user = *user;
      if (!users && c.n_users <= *user) c.n_users = *user + 1;
    }
    if (noise) c.noise_power = *noise;
    if (shadowing) c.propagation.shadowing_stddev_db = *shadowing;
    if (density) c.density_per_km2 = *density;
    if (criterion) c.criterion = comp::criterion_mode_from_string(*criterion);
    if (targets) c.outage_targets = *targets;
    if (seed) {
      c.seeds.deployment = comp::rng::derive(*seed, 1);
      c.seeds.users = comp::rng::derive(*seed, 2);
      c.seeds.shadowing = comp::rng::derive(*seed, 3);
      c.seeds.monte_carlo = comp::rng::derive(*seed, 4);
    }
    cond.apply(c.conditioning);
    c.validate();
    return c;
  }
};

fs::path prepare_out(const std::string& dir, const comp::ExperimentConfig& c) {
  const fs::path out(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ExitWith{kInput, "cannot create " + out.string() + ": " + ec.message()};
  write_text(out / "config.json", comp::to_json(c).dump(2) + "\n");
  return out;
}

int run_fig1(const ExperimentArgs& a) {
  const comp::ExperimentConfig c = a.resolve();
  const fs::path out = prepare_out(a.out, c);
  const comp::DeploymentDocument dep = comp::make_deployment(c);
  const comp::Fig1Result r = comp::run_fig1(c, dep);

  std::ofstream csv(out / "fig1.csv");
  comp::write_fig1_csv(csv, r);
  json summary = comp::fig1_summary(r);

  // The analytic CDF rises with the rate and falls as the serving set grows.
  std::vector<std::string> violations;
  for (std::size_t k = 0; k < r.curves.size(); ++k)
    for (std::size_t i = 0; i < r.rates.size(); ++i) {
      const double v = r.curves[k].analytic[i];
      if (!(v >= 0.0 && v <= 1.0)) violations.push_back("N" + std::to_string(k + 1) + " outside [0,1]");
      if (i && v < r.curves[k].analytic[i - 1] - 1e-12)
        violations.push_back("N" + std::to_string(k + 1) + " decreasing at row " + std::to_string(i));
      if (k && v > r.curves[k - 1].analytic[i] + 1e-9)
        violations.push_back("N" + std::to_string(k + 1) + " above N" + std::to_string(k) +
                             " at row " + std::to_string(i));
    }
  summary["invariant_violations"] = violations;
  write_text(out / "fig1_summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return violations.empty() ? kOk : kInvariant;
}

int run_fig2(const ExperimentArgs& a) {
  const comp::ExperimentConfig c = a.resolve();
  const fs::path out = prepare_out(a.out, c);
  const comp::DeploymentDocument dep = comp::make_deployment(c);
  const comp::Fig2Result r = comp::run_fig2(c, dep);

  {
    std::ofstream csv(out / "fig2.csv");
    comp::write_fig2_csv(csv, r);
    std::ofstream users(out / "fig2_users.csv");
    comp::write_fig2_users_csv(users, r);
  }
  json summary = comp::fig2_summary(r);
  std::vector<std::string> violations;
  for (const auto& h : r.histograms) {
    if (h.users == 0) {
      violations.push_back(h.target + ": no user succeeded");
      continue;
    }
    double s = 0.0;
    for (double f : h.fractions) s += f;
    if (std::abs(s - 1.0) > 1e-9) violations.push_back(h.target + ": fractions do not sum to 1");
  }
  summary["invariant_violations"] = violations;
  write_text(out / "fig2_summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return violations.empty() ? kOk : kInvariant;
}

// ---------------------------------------------------------------------------- validate

struct ValidateArgs {
  comp::ValidationOptions options;
  std::optional<std::string> out;
  ConditioningFlags cond;
};

int run_validate(ValidateArgs a) {
  a.cond.apply(a.options.policy);
  const comp::ValidationReport r = comp::run_validation(a.options);
  const json j = r.to_json();
  if (a.out) write_text(*a.out, j.dump(2) + "\n");
  std::cout << j.dump(2) << '\n';
  for (const auto& s : r.suites)
    std::cerr << (s.passed ? "PASS " : "FAIL ") << s.name << " (" << s.checks << " checks, worst "
              << s.worst << ", tolerance " << s.tolerance << ")\n";
  return r.passed() ? kOk : kInvariant;
}

// ---------------------------------------------------------------------------- deploy

struct DeployArgs {
  std::optional<std::string> config;
  std::optional<std::string> load;
  std::optional<std::string> out;
  std::optional<double> density;
  std::optional<double> width;
  std::optional<double> height;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<double> shadowing;
};

int run_deploy(const DeployArgs& a) {
  comp::DeploymentDocument doc;
  if (a.load) {
    doc = comp::load_deployment(*a.load);
  } else {
    comp::ExperimentConfig c = a.config ? comp::load_config(*a.config) : comp::ExperimentConfig{};
    if (a.density) c.density_per_km2 = *a.density;
    if (a.width) c.area_width_m = *a.width, c.central_width_m = std::min(c.central_width_m, *a.width);
    if (a.height) c.area_height_m = *a.height, c.central_height_m = std::min(c.central_height_m, *a.height);
    if (a.seed) c.seeds.deployment = *a.seed;
    if (a.mode) c.count_mode = comp::count_mode_from_string(*a.mode);
    if (a.shadowing) c.propagation.shadowing_stddev_db = *a.shadowing;
    c.deployment_file.reset();
    c.validate();
    doc = comp::make_deployment(c);
  }
  const json j = comp::to_json(doc);
  if (a.out) {
    comp::save_deployment(*a.out, doc);
    std::cout << json{{"stations", doc.deployment.stations.size()},
                      {"seed", doc.deployment.seed},
                      {"path", *a.out}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Outage, rate and cooperating-set analysis for CoMP downlinks under Rayleigh fading"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "comp 1.0.0");

  OutageArgs oa;
  auto* outage = app.add_subcommand("outage", "Outage probability of one link");
  outage->add_option("--serving", oa.serving, "Serving powers, comma separated")
      ->required()
      ->delimiter(',');
  outage->add_option("--interf", oa.interferers, "Interferer powers, comma separated")->delimiter(',');
  outage->add_option("--noise", oa.noise, "Noise power")->capture_default_str();
  auto* g = outage->add_option("--gamma", oa.gamma, "SINR threshold (linear)");
  auto* r = outage->add_option("--rate", oa.rate, "Target rate in bit/s/Hz");
  g->excludes(r);
  outage->add_option("--samples", oa.samples, "Also estimate by Monte-Carlo with this many samples");
  outage->add_option("--seed", oa.seed, "Monte-Carlo seed")->capture_default_str();
  outage->add_flag("--validate", oa.validate,
                   "Compare against Monte-Carlo (1e6 samples unless --samples); exit 2 on disagreement");
  oa.cond.add(outage);

  ExperimentArgs f1, f2;
  auto* fig1 = app.add_subcommand("fig1", "Capacity CDF of one user, analytic and Monte-Carlo, K = 1..n_max");
  f1.add(fig1, true);
  auto* fig2 = app.add_subcommand("fig2", "Distribution of the chosen cooperating-set size over users");
  f2.add(fig2, false);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Run the model self-checks");
  validate->add_option("--instances", va.options.instances, "Random links per suite")->capture_default_str();
  validate->add_option("--mc-instances", va.options.mc_instances, "Links for Monte-Carlo suites")
      ->capture_default_str();
  validate->add_option("--mc-samples", va.options.mc_samples, "Samples per Monte-Carlo check")
      ->capture_default_str();
  validate->add_option("--mc-tolerance", va.options.mc_tolerance, "Allowed Monte-Carlo gap")
      ->capture_default_str();
  validate->add_option("--seed", va.options.seed, "Seed")->capture_default_str();
  validate->add_option("--suite", va.options.suites, "Run only these suites")->delimiter(',');
  validate->add_flag("--inject-degenerate", va.options.inject_degenerate,
                     "Add a link with two identical serving powers");
  validate->add_option("--out", va.out, "Write the JSON report here");
  va.cond.add(validate);

  DeployArgs da;
  auto* deploy = app.add_subcommand("deploy", "Generate a deployment, or load and check one");
  deploy->add_option("--config", da.config, "Take parameters from a JSON config")->check(CLI::ExistingFile);
  deploy->add_option("--load", da.load, "Deployment JSON to load and check")->check(CLI::ExistingFile);
  deploy->add_option("--out", da.out, "Write the deployment here instead of stdout");
  deploy->add_option("--density", da.density, "Stations per km^2")->check(CLI::PositiveNumber);
  deploy->add_option("--width", da.width, "Area width (m)")->check(CLI::PositiveNumber);
  deploy->add_option("--height", da.height, "Area height (m)")->check(CLI::PositiveNumber);
  deploy->add_option("--seed", da.seed, "Deployment seed");
  deploy->add_option("--mode", da.mode, "exact or poisson")->check(CLI::IsMember({"exact", "poisson"}));
  deploy->add_option("--shadowing", da.shadowing, "Shadowing std. dev. stored with it (dB)")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (*outage) return run_outage(oa);
    if (*fig1) return run_fig1(f1);
    if (*fig2) return run_fig2(f2);
    if (*validate) return run_validate(va);
    if (*deploy) return run_deploy(da);
  } catch (const ExitWith& e) {
    std::cerr << "comp: " << e.message << '\n';
    return e.code;
  } catch (const comp::ConditioningError& e) {
    std::cerr << "comp: " << e.what() << '\n';
    return kStrict;
  } catch (const std::exception& e) {
    std::cerr << "comp: " << e.what() << '\n';
    return kInput;
  }
  return kInput;
}
