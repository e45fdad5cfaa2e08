#pragma once

// Test-only reference computations. Nothing here calls into the library's
// closed form or its sampler: randomness comes from <random>, integrals from
// composite Simpson quadrature, products are evaluated term by term.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Direct product-form evaluation of the cooperative outage formula.
inline double outage_direct(const std::vector<double>& serving, const std::vector<double>& interf,
                            double noise, double gamma) {
  double success = 0.0;
  for (std::size_t n = 0; n < serving.size(); ++n) {
    const double pn = serving[n];
    double term = std::exp(-gamma * noise / pn);
    for (std::size_t j = 0; j < serving.size(); ++j)
      if (j != n) term *= pn / (pn - serving[j]);
    for (double pk : interf) term *= pn / (pk * gamma + pn);
    success += term;
  }
  return 1.0 - success;
}

/// Monte-Carlo P(SINR <= gamma) with std::exponential_distribution draws.
inline double outage_mc(const std::vector<double>& serving, const std::vector<double>& interf,
                        double noise, double gamma, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> e(1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0, in = noise;
    for (double p : serving) s += p * e(gen);
    for (double p : interf) in += p * e(gen);
    if (s <= gamma * in) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Monte-Carlo P(sum_n H_n > x).
inline double sum_ccdf_mc(const std::vector<double>& powers, double x, std::size_t n,
                          std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::exponential_distribution<double> e(1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double p : powers) s += p * e(gen);
    if (s > x) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double s = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// P(H1 + H2 <= gamma * H3) for exponential means p1, p2, p3 by nested
/// quadrature over the densities.
inline double two_server_outage_quadrature(double p1, double p2, double p3, double gamma) {
  // CDF of H1 + H2 at t by convolution.
  auto cdf12 = [&](double t) {
    if (t <= 0.0) return 0.0;
    return simpson([&](double s) { return std::exp(-s / p1) / p1 * (1.0 - std::exp(-(t - s) / p2)); },
                   0.0, t, 400);
  };
  const double upper = 60.0 * p3;
  return simpson([&](double t) { return std::exp(-t / p3) / p3 * cdf12(gamma * t); }, 0.0, upper,
                 6000);
}

/// max over a log-spaced grid of log2(1+g)(1 - outage(g)).
struct GridMax {
  double goodput = -1.0;
  double gamma = 0.0;
};

inline GridMax goodput_brute_force(const std::function<double(double)>& outage, double lo,
                                   double hi, std::size_t points) {
  GridMax best;
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double g = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    const double v = std::log2(1.0 + g) * (1.0 - outage(g));
    if (v > best.goodput) best = {v, g};
  }
  return best;
}

/// Random powers, log-uniform over [10^-decades, 1].
inline std::vector<double> log_uniform_powers(std::mt19937_64& gen, std::size_t n,
                                              double decades) {
  std::uniform_real_distribution<double> u(-decades, 0.0);
  std::vector<double> p(n);
  for (double& v : p) v = std::pow(10.0, u(gen));
  return p;
}

}  // namespace oracle
