#pragma once

// Monte-Carlo SINR oracle for the Rayleigh-faded cooperative downlink.
//
// Each received power P_i is multiplied by an independent unit-mean
// exponential draw. Draw j of sample i always comes from position
// i*stride + j of a counter-based stream keyed by the seed, so the OpenMP
// kernels produce the same samples for any number of threads and agree with
// the serial reference up to the last bits of the logarithm.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "comp/query.hpp"

namespace comp {

/// SINR reported when there is neither interference nor noise.
inline constexpr double kInfiniteSinr = std::numeric_limits<double>::max();

/// One fading realization: H_i = |h_i|^2 P_i for every link.
struct FadingSample {
  std::vector<double> serving_draws;
  std::vector<double> interferer_draws;
};

/// The realization at `sample_index` (serial, scalar code path).
FadingSample draw_fading(const LinkQuery& link, std::uint64_t seed, std::uint64_t sample_index);

/// SINR samples for a link. OpenMP + SIMD kernel.
std::vector<double> sample_sinr(const LinkQuery& link, std::uint64_t seed, std::size_t n_samples);

/// Serial reference for sample_sinr built on draw_fading.
std::vector<double> sample_sinr_reference(const LinkQuery& link, std::uint64_t seed,
                                          std::size_t n_samples);

/// SINR samples of the nested serving sets {1..K}, K = 1..n_max, over the
/// same fading draws. powers_desc holds every base station, strongest first.
class NestedSinrSamples {
 public:
  NestedSinrSamples(std::size_t n_max, std::size_t n_samples)
      : n_max_(n_max), n_samples_(n_samples), values_(n_max * n_samples) {}

  std::size_t n_max() const noexcept { return n_max_; }
  std::size_t n_samples() const noexcept { return n_samples_; }

  /// Samples for the K strongest serving (1-based K).
  std::span<const double> for_set_size(std::size_t k) const {
    return {values_.data() + (k - 1) * n_samples_, n_samples_};
  }
  std::span<double> for_set_size(std::size_t k) {
    return {values_.data() + (k - 1) * n_samples_, n_samples_};
  }

 private:
  std::size_t n_max_;
  std::size_t n_samples_;
  std::vector<double> values_;
};

NestedSinrSamples sample_nested_sinr(std::span<const double> powers_desc, double noise_power,
                                     std::size_t n_max, std::uint64_t seed,
                                     std::size_t n_samples);

NestedSinrSamples sample_nested_sinr_reference(std::span<const double> powers_desc,
                                               double noise_power, std::size_t n_max,
                                               std::uint64_t seed, std::size_t n_samples);

/// Empirical CDF over a sorted copy of the samples.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);

  /// Fraction of samples <= x.
  double operator()(double x) const;

  std::span<const double> sorted_values() const noexcept { return sorted_; }
  std::size_t sample_count() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// Fraction of samples <= threshold.
double empirical_outage(std::span<const double> samples, double threshold);

/// Fraction of samples with log2(1 + SINR) <= R for each rate of the grid.
std::vector<double> empirical_capacity_cdf(std::span<const double> samples,
                                           std::span<const double> rate_grid);
std::vector<double> empirical_capacity_cdf(const EmpiricalCdf& cdf,
                                           std::span<const double> rate_grid);

namespace detail {

inline constexpr std::size_t kDrawBlock = 64;

/// out[i] = -log(u_i) for counter positions first .. first + kDrawBlock - 1
/// of stream `key`. Vectorized; may differ from std::log by a few ulp.
void exponential_block(std::uint64_t key, std::uint64_t first, double* out) noexcept;

/// Scalar unit-mean exponential at one counter position.
double exponential_at(std::uint64_t key, std::uint64_t counter) noexcept;

std::uint64_t stream_key(std::uint64_t seed) noexcept;

}  // namespace detail

}  // namespace comp
