#include "comp/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>

#include "comp/montecarlo.hpp"
#include "comp/optimize.hpp"
#include "comp/rng.hpp"

namespace comp {

namespace {

constexpr std::size_t kMaxMessages = 5;

// Log-uniform powers over `decades`, rejected until pairwise gaps are at
// least `min_gap` (relative).
std::vector<double> random_powers(std::mt19937_64& gen, std::size_t n, double decades,
                                  double min_gap = 1e-3) {
  std::uniform_real_distribution<double> u(-decades, 0.0);
  std::vector<double> p;
  while (p.size() < n) {
    const double v = std::pow(10.0, u(gen));
    const bool close = std::any_of(p.begin(), p.end(), [&](double w) {
      return std::abs(v - w) / std::max(v, w) < min_gap;
    });
    if (!close) p.push_back(v);
  }
  return p;
}

struct RandomLink {
  std::vector<double> serving;
  std::vector<double> interferers;
  double noise = 0.0;
};

RandomLink random_link(std::mt19937_64& gen, double decades, double noise_scale) {
  std::uniform_int_distribution<std::size_t> ns(1, 6), ni(0, 12);
  const std::size_t a = ns(gen), b = ni(gen);
  std::vector<double> all = random_powers(gen, a + b, decades);
  RandomLink l;
  l.serving.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(a));
  l.interferers.assign(all.begin() + static_cast<std::ptrdiff_t>(a), all.end());
  l.noise = noise_scale;
  return l;
}

LinkQuery to_query(const RandomLink& l) {
  return {PowerSet(l.serving), PowerSet(l.interferers), l.noise};
}

class Suite {
 public:
  Suite(std::string name, double tolerance) { r_.name = std::move(name), r_.tolerance = tolerance; }

  // Records an error against the suite tolerance.
  void error(double err, const std::string& what) {
    ++r_.checks;
    if (std::isnan(err)) err = INFINITY;
    r_.worst = std::max(r_.worst, err);
    if (err > r_.tolerance) fail(what + " (error " + std::to_string(err) + ")");
  }
  void check(bool ok, const std::string& what) {
    ++r_.checks;
    if (!ok) fail(what);
  }
  void fail(const std::string& what) {
    r_.passed = false;
    ++r_.failures;
    if (r_.messages.size() < kMaxMessages) r_.messages.push_back(what);
  }
  SuiteResult result() && { return std::move(r_); }

 private:
  SuiteResult r_;
};

std::string at(std::size_t i) { return "instance " + std::to_string(i); }

SuiteResult normalization(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("normalization", 1e-9);
  std::uniform_int_distribution<std::size_t> size(2, 8);
  for (std::size_t i = 0; i < o.instances; ++i) {
    const auto p = random_powers(gen, size(gen), 6.0);
    s.error(std::abs(partial_fraction_sum(p) - 1.0), at(i) + ": weights do not sum to 1");
  }
  return std::move(s).result();
}

SuiteResult monotonicity(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("monotonicity", 1e-12);
  for (std::size_t i = 0; i < o.instances; ++i) {
    const OutageModel m(to_query(random_link(gen, 3.0, i % 2 ? 1e-3 : 0.0)), o.policy);
    double prev = 0.0;
    for (double g = 1e-4; g < 1e6; g *= 1.25) {
      const double p = m(g);
      s.check(p >= 0.0 && p <= 1.0, at(i) + ": outage outside [0, 1]");
      s.error(std::max(0.0, prev - p), at(i) + ": outage decreases in the threshold");
      prev = p;
    }
  }
  return std::move(s).result();
}

SuiteResult boundary(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("boundary", 1e-6);
  for (std::size_t i = 0; i < o.instances; ++i) {
    // Two decades of spread plus noise, so the outage is within 1e-6 of one
    // well before the threshold overflows.
    RandomLink l = random_link(gen, 2.0, 1e-2);
    const OutageModel m(to_query(l), o.policy);
    s.error(m(0.0), at(i) + ": outage at zero threshold");
    s.error(1.0 - m(1e12), at(i) + ": outage does not reach one");
  }
  const OutageModel free({PowerSet{1.0, 0.5}, PowerSet{}, 0.0}, o.policy);
  s.error(free(1e9), "outage-free link");
  return std::move(s).result();
}

SuiteResult siso_reduction(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("siso_reduction", 1e-12);
  for (std::size_t i = 0; i < o.instances; ++i) {
    RandomLink l = random_link(gen, 3.0, i % 2 ? 1e-3 : 0.0);
    l.serving.resize(1);
    const LinkQuery q = to_query(l);
    const OutageModel m(q, o.policy);
    for (double g : {1e-3, 0.1, 1.0, 10.0, 1e3})
      s.error(std::abs(m(g) - siso_outage(l.serving[0], q.interferers, l.noise, g)),
              at(i) + ": SISO mismatch");
  }
  return std::move(s).result();
}

SuiteResult scale_invariance(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("scale_invariance", 1e-9);
  for (std::size_t i = 0; i < o.instances; ++i) {
    RandomLink l = random_link(gen, 3.0, 0.0);
    RandomLink scaled = l;
    const double c = i % 2 ? 1e-9 : 1e7;
    for (double& v : scaled.serving) v *= c;
    for (double& v : scaled.interferers) v *= c;
    const OutageModel a(to_query(l), o.policy), b(to_query(scaled), o.policy);
    for (double g : {1e-2, 1.0, 1e2})
      s.error(std::abs(a(g) - b(g)), at(i) + ": not invariant under power scaling");
  }
  return std::move(s).result();
}

SuiteResult oracle_gap(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("oracle_gap", o.mc_tolerance);
  for (std::size_t i = 0; i < o.mc_instances; ++i) {
    const RandomLink l = random_link(gen, 2.0, i % 3 == 0 ? 1e-2 : 0.0);
    const LinkQuery q = to_query(l);
    const OutageModel m(q, o.policy);
    const auto samples = sample_sinr(q, rng::derive(o.seed, i), o.mc_samples);
    for (double g : {0.1, 1.0, 10.0})
      s.error(std::abs(m(g) - empirical_outage(samples, g)), at(i) + ": Monte-Carlo gap");
  }
  return std::move(s).result();
}

SuiteResult fixed_outage(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("fixed_outage", 1e-6);
  for (std::size_t i = 0; i < o.instances; ++i) {
    RandomLink l = random_link(gen, 3.0, i % 2 ? 1e-4 : 0.0);
    if (l.interferers.empty()) l.interferers.push_back(l.serving.back() * 0.37);
    const OutageModel m(to_query(l), o.policy);
    for (double p : {0.01, 0.1, 0.5}) {
      try {
        const auto c = capacity_at_fixed_outage(m, p);
        s.error(std::abs(m(c.gamma_o) - p), at(i) + ": P_out(gamma_o) != p_o");
      } catch (const NoSolutionError& e) {
        s.check(false, at(i) + ": " + e.what());
      }
    }
  }
  return std::move(s).result();
}

SuiteResult goodput_sandwich(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("goodput_sandwich", 1e-9);
  const SearchBounds bounds;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, o.instances / 4); ++i) {
    RandomLink l = random_link(gen, 3.0, 0.0);
    if (l.interferers.empty()) l.interferers.push_back(l.serving.back() * 0.5);
    const OutageModel m(to_query(l), o.policy);
    const RateOptimum r = maximize_goodput(m, bounds);
    double grid_best = 0.0;
    const int n = 2000;
    for (int k = 0; k < n; ++k) {
      const double g = bounds.gamma_lo * std::pow(bounds.gamma_hi / bounds.gamma_lo, k / double(n - 1));
      grid_best = std::max(grid_best, threshold_to_rate(g) * (1.0 - m(g)));
    }
    // The optimizer never loses to a finer grid, and goodput never beats the rate.
    s.error(std::max(0.0, (grid_best - r.goodput) / grid_best), at(i) + ": below grid maximum");
    s.error(std::max(0.0, r.goodput - r.rate_star), at(i) + ": goodput above rate");
  }
  return std::move(s).result();
}

SuiteResult separation(const ValidationOptions& o, std::mt19937_64& gen) {
  Suite s("separation", o.mc_tolerance);
  std::vector<RandomLink> links;
  for (std::size_t i = 0; i < o.mc_instances; ++i) {
    RandomLink l = random_link(gen, 2.0, 0.0);
    // Cluster: duplicate a serving power up to a tiny relative offset.
    l.serving.push_back(l.serving[0] * (1.0 - 1e-9 * static_cast<double>(i + 1)));
    if (l.interferers.empty()) l.interferers.push_back(l.serving[0] * 0.3);
    links.push_back(std::move(l));
  }
  if (o.inject_degenerate) links.push_back({{1.0, 1.0}, {0.5}, 0.0});

  for (std::size_t i = 0; i < links.size(); ++i) {
    const LinkQuery q = to_query(links[i]);
    try {
      const OutageModel m(q, o.policy);
      const ConditioningReport& rep = m.separation_report();
      s.check(rep.min_relative_gap >= o.policy.min_relative_gap * (1.0 - 1e-9),
              at(i) + ": separation below the policy gap");
      const auto samples = sample_sinr(q, rng::derive(o.seed, 1000 + i), o.mc_samples);
      for (double g : {0.3, 3.0})
        s.error(std::abs(m(g) - empirical_outage(samples, g)), at(i) + ": Monte-Carlo gap");
    } catch (const DegeneratePowersError& e) {
      s.check(false, at(i) + ": " + e.what());
    } catch (const ConditioningError& e) {
      s.check(false, at(i) + ": " + e.what());
    }
  }
  return std::move(s).result();
}

using SuiteFn = SuiteResult (*)(const ValidationOptions&, std::mt19937_64&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{
      {"normalization", normalization},   {"monotonicity", monotonicity},
      {"boundary", boundary},             {"siso_reduction", siso_reduction},
      {"scale_invariance", scale_invariance}, {"oracle_gap", oracle_gap},
      {"fixed_outage", fixed_outage},     {"goodput_sandwich", goodput_sandwich},
      {"separation", separation}};
  return r;
}

}  // namespace

std::vector<std::string> validation_suite_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

bool ValidationReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed; });
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const SuiteResult& s : suites)
    arr.push_back({{"name", s.name},
                   {"passed", s.passed},
                   {"checks", s.checks},
                   {"failures", s.failures},
                   {"worst_error", s.worst},
                   {"tolerance", s.tolerance},
                   {"messages", s.messages}});
  return {{"passed", passed()}, {"suites", std::move(arr)}};
}

ValidationReport run_validation(const ValidationOptions& options) {
  if (options.instances == 0 || options.mc_samples == 0)
    throw std::invalid_argument("validation needs at least one instance and one sample");
  for (const std::string& name : options.suites)
    if (std::none_of(registry().begin(), registry().end(),
                     [&](const auto& e) { return e.first == name; }))
      throw std::invalid_argument("unknown validation suite '" + name + "'");

  ValidationReport report;
  for (std::size_t k = 0; k < registry().size(); ++k) {
    const auto& [name, fn] = registry()[k];
    if (!options.suites.empty() &&
        std::find(options.suites.begin(), options.suites.end(), name) == options.suites.end())
      continue;
    // Each suite has its own stream, so selecting suites does not change results.
    std::mt19937_64 gen(rng::derive(options.seed, k));
    report.suites.push_back(fn(options, gen));
  }
  return report;
}

}  // namespace comp
