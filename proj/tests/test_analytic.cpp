#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "doctest.h"

#include "comp/analytic.hpp"
#include "oracles.hpp"

using namespace comp;

namespace {

double pout(std::vector<double> serving, std::vector<double> interf, double noise, double gamma,
            const ConditioningPolicy& policy = {}) {
  return outage_probability({{PowerSet(std::move(serving)), PowerSet(std::move(interf)), noise}, gamma},
                            policy)
      .probability;
}

}  // namespace

TEST_CASE("gen_chi2_ccdf closed-form values") {
  SUBCASE("single term is an exponential tail") {
    for (double x : {0.0, 0.3, 1.0, 7.5}) CHECK(gen_chi2_ccdf({2.5}, x) == std::exp(-x / 2.5));
  }
  SUBCASE("x = 0 gives total probability") {
    CHECK(gen_chi2_ccdf({1.0, 2.0, 3.5, 0.1}, 0.0) == 1.0);
  }
  SUBCASE("two terms against Monte-Carlo of two exponential draws") {
    const double expected = 2.0 * std::exp(-0.5) - std::exp(-1.0);  // 0.845181878...
    CHECK(gen_chi2_ccdf({1.0, 2.0}, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    const double mc = oracle::sum_ccdf_mc({1.0, 2.0}, 1.0, 1'000'000, 11);
    CHECK(std::abs(mc - expected) < 4.0 * std::sqrt(expected * (1 - expected) / 1e6));
  }
  SUBCASE("monotone non-increasing in x") {
    double prev = 1.0;
    for (double x = 0.0; x < 40.0; x += 0.25) {
      const double v = gen_chi2_ccdf({0.5, 1.0, 3.0, 4.0}, x);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("outage_probability hand-verified instances") {
  CHECK(pout({1.0}, {0.5}, 0.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(pout({1.0, 2.0}, {0.5}, 0.0, 1.0) == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
  // Independent route for 1/15: nested quadrature over the densities.
  CHECK(oracle::two_server_outage_quadrature(1.0, 2.0, 0.5, 1.0) ==
        doctest::Approx(1.0 / 15.0).epsilon(1e-6));
  const double mc = oracle::outage_mc({1.0, 2.0}, {0.5}, 0.0, 1.0, 1'000'000, 5);
  CHECK(std::abs(mc - 1.0 / 15.0) < 0.002);
}

TEST_CASE("zero threshold and outage-free links") {
  CHECK(pout({1.0, 2.0}, {0.5, 0.25}, 0.3, 0.0) == 0.0);
  for (double g : {1e-3, 1.0, 1e6}) CHECK(pout({1.0, 0.4}, {}, 0.0, g) == 0.0);
  // Noise alone: 1 - ccdf(g * noise).
  CHECK(pout({1.0, 2.0}, {}, 0.5, 2.0) ==
        doctest::Approx(1.0 - gen_chi2_ccdf({1.0, 2.0}, 1.0)).epsilon(1e-13));
}

TEST_CASE("siso_outage") {
  CHECK(siso_outage(1.0, {0.5}, 0.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(siso_outage(1.0, {}, 0.0, 123.0) == 0.0);
  CHECK(siso_outage(1.0, {0.9, 1.1}, 0.0, 1.0) ==
        doctest::Approx(1.0 - 1.0 / (1.9 * 2.1)).epsilon(1e-15));
  const double mc = oracle::outage_mc({1.0}, {0.9, 1.1}, 0.0, 1.0, 1'000'000, 17);
  CHECK(std::abs(mc - 0.7493734335839599) < 0.002);
  CHECK_THROWS_AS(siso_outage(0.0, {1.0}, 0.0, 1.0), std::invalid_argument);

  std::mt19937_64 gen(3);
  for (int t = 0; t < 200; ++t) {
    auto interf = oracle::log_uniform_powers(gen, 1 + t % 30, 5);
    const double p1 = std::pow(10.0, -std::uniform_real_distribution<double>(0, 5)(gen));
    const double noise = t % 3 == 0 ? 1e-3 : 0.0;
    const double g = std::pow(10.0, std::uniform_real_distribution<double>(-3, 3)(gen));
    const double a = pout({p1}, interf, noise, g);
    CHECK(std::abs(a - siso_outage(p1, PowerSet(interf), noise, g)) <= 1e-12);
  }
}

TEST_CASE("separation policy") {
  SUBCASE("duplicates are perturbed downward and reported") {
    const SeparatedPowers s = separate_powers(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0});
    CHECK(s.perturbed);
    CHECK(s.serving[0] == 1.0);
    CHECK(s.serving[1] < 1.0);
    CHECK(s.interferers[0] < s.serving[1]);
    CHECK(s.min_relative_gap >= 1e-6);
    CHECK(s.min_relative_gap < 1e-5);
  }
  SUBCASE("well separated powers are untouched") {
    const std::vector<double> p{3.0, 1.0, 2.0};
    const SeparatedPowers s = separate_powers(p, {});
    CHECK_FALSE(s.perturbed);
    CHECK(s.serving == p);
    CHECK(s.min_relative_gap == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("perturbation disabled raises degenerate powers") {
    ConditioningPolicy strict;
    strict.allow_perturbation = false;
    CHECK_THROWS_AS(pout({1.0, 1.0}, {0.5}, 0.0, 1.0, strict), DegeneratePowersError);
    CHECK_THROWS_AS(gen_chi2_ccdf({2.0, 2.0}, 1.0, strict), DegeneratePowersError);
  }
  SUBCASE("perturbed query stays close to its neighbour") {
    const double a = pout({1.0, 1.0}, {0.5}, 0.0, 1.0);
    const double b = pout({1.0, 1.0 - 1e-3}, {0.5}, 0.0, 1.0);
    CHECK(std::abs(a - b) < 1e-3);
    const OutageModel m({{1.0, 1.0}, {0.5}, 0.0});
    CHECK(m.separation_report().perturbed);
    CHECK(m.separation_report().min_relative_gap > 0.0);
  }
}

TEST_CASE("partial-fraction normalization") {
  std::mt19937_64 gen(21);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> p;
    do {
      p = oracle::log_uniform_powers(gen, 2 + t % 7, 6);
    } while (min_relative_gap(p) < 1e-3);
    CHECK(gen_chi2_ccdf(PowerSet(p), 0.0) == 1.0);
    CHECK(std::abs(partial_fraction_sum(p) - 1.0) <= 1e-9);
  }
}

TEST_CASE("monotonicity and limits on random instances") {
  std::mt19937_64 gen(8);
  std::uniform_int_distribution<int> ns(1, 8), ni(0, 20);
  for (int t = 0; t < 100; ++t) {
    // Two decades of spread keep the success probability at g = 1e9 below 1e-6.
    auto serving = oracle::log_uniform_powers(gen, ns(gen), 2);
    auto interf = oracle::log_uniform_powers(gen, ni(gen), 2);
    if (min_relative_gap(serving, interf) < 1e-3) continue;
    const double noise = t % 4 == 0 ? 1e-2 : 0.0;
    const OutageModel m({PowerSet(serving), PowerSet(interf), noise});

    double prev = 0.0;
    for (double g = 1e-4; g < 1e7; g *= 1.5) {
      const double v = m(g);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
    if (!interf.empty() || noise > 0.0) CHECK(m(1e9) >= 1.0 - 1e-6);

    const double g = 0.7;
    const double base = m(g);
    if (!interf.empty()) {
      auto more = interf;
      more[0] *= 1.5;
      if (min_relative_gap(serving, more) >= 1e-6)
        CHECK(OutageModel({PowerSet(serving), PowerSet(more), noise})(g) >= base - 1e-12);
    }
    auto stronger = serving;
    stronger[0] *= 1.5;
    if (min_relative_gap(stronger, interf) >= 1e-6)
      CHECK(OutageModel({PowerSet(stronger), PowerSet(interf), noise})(g) <= base + 1e-12);
  }
}

TEST_CASE("scale invariance without noise") {
  std::mt19937_64 gen(99);
  for (int t = 0; t < 200; ++t) {
    auto serving = oracle::log_uniform_powers(gen, 1 + t % 5, 3);
    auto interf = oracle::log_uniform_powers(gen, t % 12, 3);
    if (min_relative_gap(serving, interf) < 1e-2) continue;
    const double g = std::pow(10.0, std::uniform_real_distribution<double>(-2, 2)(gen));
    const double c = std::pow(10.0, std::uniform_real_distribution<double>(-8, 8)(gen));
    auto s2 = serving, i2 = interf;
    for (double& v : s2) v *= c;
    for (double& v : i2) v *= c;
    CHECK(std::abs(pout(serving, interf, 0.0, g) - pout(s2, i2, 0.0, g)) <= 1e-12);
  }
}

TEST_CASE("agreement with an independent Monte-Carlo") {
  std::mt19937_64 gen(1234);
  for (int t = 0; t < 6; ++t) {
    auto serving = oracle::log_uniform_powers(gen, 1 + t, 2);
    auto interf = oracle::log_uniform_powers(gen, 3 * t + 1, 2);
    if (min_relative_gap(serving, interf) < 1e-3) continue;
    const double g = 0.3 + 0.4 * t;
    const double a = pout(serving, interf, 0.0, g);
    const double mc = oracle::outage_mc(serving, interf, 0.0, g, 1'000'000, 40 + t);
    CHECK(std::abs(a - mc) <= 4.0 * std::sqrt(a * (1 - a) / 1e6) + 1e-4);
    CHECK(std::abs(a - oracle::outage_direct(serving, interf, 0.0, g)) < 1e-10);
  }
}

TEST_CASE("conditioning fallback") {
  // Eight serving powers within 1e-5 of each other: weights near 1e35.
  std::vector<double> serving;
  for (int i = 0; i < 8; ++i) serving.push_back(1.0 - 1e-5 * i);
  const LinkQuery link{PowerSet(serving), {0.3, 0.2}, 0.0};
  const OutageModel m(link);
  const OutageResult r = m.evaluate(2.0);
  CHECK(r.report.fell_back_to_oracle);
  CHECK(r.report.cancellation_ratio > 1e12);
  const double mc = oracle::outage_mc(serving, {0.3, 0.2}, 0.0, 2.0, 1'000'000, 77);
  CHECK(std::abs(r.probability - mc) < 0.005);
  // Same seed, same answer.
  CHECK(OutageModel(link).evaluate(2.0).probability == r.probability);

  ConditioningPolicy no_fallback;
  no_fallback.allow_fallback = false;
  CHECK_THROWS_AS(OutageModel(link, no_fallback).evaluate(2.0), ConditioningError);

  // Two close powers stay on the closed form.
  const OutageResult ok = OutageModel({{1.0, 1.0 - 1e-5}, {0.5}, 0.0}).evaluate(1.0);
  CHECK_FALSE(ok.report.fell_back_to_oracle);
}

TEST_CASE("capacity_cdf") {
  const std::vector<double> grid{0.0, 0.5, 1.0, 2.0, 4.0};
  const CapacityCdf c = capacity_cdf(LinkQuery{{1.0, 2.0}, {0.5}, 0.0}, grid);
  CHECK(c.probabilities[0] == 0.0);
  CHECK(c.probabilities[2] == doctest::Approx(1.0 / 15.0).epsilon(1e-12));
  CHECK(std::is_sorted(c.probabilities.begin(), c.probabilities.end()));

  const std::vector<double> three{0.25, 1.0, 3.0};
  const CapacityCdf s = capacity_cdf(LinkQuery{{1.0}, {0.5, 0.2}, 0.0}, three);
  for (std::size_t i = 0; i < three.size(); ++i)
    CHECK(std::abs(s.probabilities[i] - siso_outage(1.0, {0.5, 0.2}, 0.0, std::exp2(three[i]) - 1.0)) <=
          1e-12);

  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(capacity_cdf(LinkQuery{{1.0}, {0.5}, 0.0}, bad), std::invalid_argument);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(PowerSet({1.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(PowerSet({0.0}), std::invalid_argument);
  CHECK_THROWS_AS(outage_probability({{{}, {0.5}, 0.0}, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(outage_probability({{{1.0}, {0.5}, -1.0}, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(outage_probability({{{1.0}, {0.5}, 0.0}, -1.0}), std::invalid_argument);
}

TEST_CASE("concurrent evaluation of a shared model") {
  std::vector<double> serving;
  for (int i = 0; i < 6; ++i) serving.push_back(1.0 - 2e-5 * i);
  const OutageModel m({PowerSet(serving), {0.4, 0.1}, 0.0}, {.fallback_samples = 100'000});
  std::vector<double> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) threads.emplace_back([&, t] { results[t] = m(1.5); });
  for (auto& th : threads) th.join();
  for (double r : results) CHECK(r == results[0]);
}
