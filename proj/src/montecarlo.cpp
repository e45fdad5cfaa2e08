#include "comp/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "comp/rng.hpp"

namespace comp {

namespace detail {

double exponential_at(std::uint64_t key, std::uint64_t counter) noexcept {
  return -std::log(rng::to_open_unit(rng::at(key, counter)));
}

std::uint64_t stream_key(std::uint64_t seed) noexcept { return rng::derive(seed, 0x5111'2000ULL); }

}  // namespace detail

namespace {

void check_sampling(const LinkQuery& link, std::size_t n_samples) {
  link.validate();
  if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
}

double sinr(double signal, double interference) {
  if (interference <= 0.0) return kInfiniteSinr;
  return std::min(signal / interference, kInfiniteSinr);
}

// Links of one sample in counter order: serving first, then interferers.
std::vector<double> concat_powers(const LinkQuery& link) {
  std::vector<double> powers(link.serving.values().begin(), link.serving.values().end());
  powers.insert(powers.end(), link.interferers.values().begin(), link.interferers.values().end());
  return powers;
}

// Fills draws[j] = P_j * E_j for sample `index` using the block kernel.
// `draws` must hold at least powers.size() rounded up to kDrawBlock.
void weighted_draws(std::uint64_t key, std::uint64_t index, std::span<const double> powers,
                    double* draws) {
  const std::size_t stride = powers.size();
  const std::uint64_t base = index * stride;
  for (std::size_t j0 = 0; j0 < stride; j0 += detail::kDrawBlock) {
    detail::exponential_block(key, base + j0, draws + j0);
    const std::size_t end = std::min(stride, j0 + detail::kDrawBlock);
    for (std::size_t j = j0; j < end; ++j) draws[j] *= powers[j];
  }
}

std::size_t padded(std::size_t n) {
  return (n + detail::kDrawBlock - 1) / detail::kDrawBlock * detail::kDrawBlock;
}

}  // namespace

FadingSample draw_fading(const LinkQuery& link, std::uint64_t seed, std::uint64_t sample_index) {
  link.validate();
  const std::uint64_t key = detail::stream_key(seed);
  const std::size_t ns = link.serving.size();
  const std::uint64_t base = sample_index * (ns + link.interferers.size());
  FadingSample s;
  s.serving_draws.reserve(ns);
  s.interferer_draws.reserve(link.interferers.size());
  for (std::size_t j = 0; j < ns; ++j)
    s.serving_draws.push_back(link.serving[j] * detail::exponential_at(key, base + j));
  for (std::size_t k = 0; k < link.interferers.size(); ++k)
    s.interferer_draws.push_back(link.interferers[k] * detail::exponential_at(key, base + ns + k));
  return s;
}

std::vector<double> sample_sinr_reference(const LinkQuery& link, std::uint64_t seed,
                                          std::size_t n_samples) {
  check_sampling(link, n_samples);
  std::vector<double> out(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const FadingSample s = draw_fading(link, seed, i);
    double signal = 0.0;
    for (double h : s.serving_draws) signal += h;
    double interference = 0.0;
    for (double h : s.interferer_draws) interference += h;
    out[i] = sinr(signal, interference + link.noise_power);
  }
  return out;
}

std::vector<double> sample_sinr(const LinkQuery& link, std::uint64_t seed, std::size_t n_samples) {
  check_sampling(link, n_samples);
  std::vector<double> out(n_samples);
  if (link.interferers.empty() && link.noise_power == 0.0) {
    std::fill(out.begin(), out.end(), kInfiniteSinr);
    return out;
  }
  const std::uint64_t key = detail::stream_key(seed);
  const std::vector<double> powers = concat_powers(link);
  const std::size_t ns = link.serving.size();
  const std::size_t width = padded(powers.size());
  const double noise = link.noise_power;
  const auto n = static_cast<std::int64_t>(n_samples);

#pragma omp parallel
  {
    std::vector<double> draws(width);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      weighted_draws(key, static_cast<std::uint64_t>(i), powers, draws.data());
      double signal = 0.0;
      for (std::size_t j = 0; j < ns; ++j) signal += draws[j];
      double interference = 0.0;
      for (std::size_t j = ns; j < powers.size(); ++j) interference += draws[j];
      out[static_cast<std::size_t>(i)] = sinr(signal, interference + noise);
    }
  }
  return out;
}

namespace {

void check_nested(std::span<const double> powers_desc, double noise_power, std::size_t n_max,
                  std::size_t n_samples) {
  if (n_max == 0 || n_max > powers_desc.size())
    throw std::invalid_argument("n_max must be in [1, number of stations]");
  if (n_samples == 0) throw std::invalid_argument("n_samples must be positive");
  for (std::size_t i = 0; i < powers_desc.size(); ++i) {
    if (!(powers_desc[i] > 0.0) || !std::isfinite(powers_desc[i]))
      throw std::invalid_argument("received powers must be finite and strictly positive");
    if (i > 0 && powers_desc[i] > powers_desc[i - 1])
      throw std::invalid_argument("powers must be sorted in descending order");
  }
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power))
    throw std::invalid_argument("noise power must be finite and non-negative");
}

// SINR of every nested set from one sample's weighted draws. Interference is
// summed from the weakest link up so no subtraction is involved.
void nested_from_draws(const double* draws, std::size_t m, double noise_power, std::size_t n_max,
                       std::size_t index, NestedSinrSamples& out) {
  double tail = 0.0;
  for (std::size_t j = m; j-- > n_max;) tail += draws[j];
  std::array<double, 64> interference{};
  std::vector<double> big;
  double* inter = interference.data();
  if (n_max > interference.size()) {
    big.resize(n_max);
    inter = big.data();
  }
  for (std::size_t k = n_max; k >= 1; --k) {
    inter[k - 1] = tail;
    tail += draws[k - 1];
  }
  double signal = 0.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    signal += draws[k - 1];
    out.for_set_size(k)[index] = sinr(signal, inter[k - 1] + noise_power);
  }
}

}  // namespace

NestedSinrSamples sample_nested_sinr_reference(std::span<const double> powers_desc,
                                               double noise_power, std::size_t n_max,
                                               std::uint64_t seed, std::size_t n_samples) {
  check_nested(powers_desc, noise_power, n_max, n_samples);
  NestedSinrSamples out(n_max, n_samples);
  const std::uint64_t key = detail::stream_key(seed);
  const std::size_t m = powers_desc.size();
  std::vector<double> draws(m);
  for (std::size_t i = 0; i < n_samples; ++i) {
    for (std::size_t j = 0; j < m; ++j)
      draws[j] = powers_desc[j] * detail::exponential_at(key, i * m + j);
    nested_from_draws(draws.data(), m, noise_power, n_max, i, out);
  }
  return out;
}

NestedSinrSamples sample_nested_sinr(std::span<const double> powers_desc, double noise_power,
                                     std::size_t n_max, std::uint64_t seed,
                                     std::size_t n_samples) {
  check_nested(powers_desc, noise_power, n_max, n_samples);
  NestedSinrSamples out(n_max, n_samples);
  const std::uint64_t key = detail::stream_key(seed);
  const std::size_t m = powers_desc.size();
  const std::size_t width = padded(m);
  const auto n = static_cast<std::int64_t>(n_samples);

#pragma omp parallel
  {
    std::vector<double> draws(width);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      weighted_draws(key, static_cast<std::uint64_t>(i), powers_desc, draws.data());
      nested_from_draws(draws.data(), m, noise_power, n_max, static_cast<std::size_t>(i), out);
    }
  }
  return out;
}

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw std::invalid_argument("empirical CDF needs at least one sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double empirical_outage(std::span<const double> samples, double threshold) {
  if (samples.empty()) throw std::invalid_argument("samples must not be empty");
  const auto count = std::count_if(samples.begin(), samples.end(),
                                   [threshold](double s) { return s <= threshold; });
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

std::vector<double> empirical_capacity_cdf(const EmpiricalCdf& cdf,
                                           std::span<const double> rate_grid) {
  std::vector<double> out;
  out.reserve(rate_grid.size());
  for (std::size_t i = 0; i < rate_grid.size(); ++i) {
    if (i > 0 && rate_grid[i] < rate_grid[i - 1])
      throw std::invalid_argument("rate grid must be non-decreasing");
    out.push_back(cdf(rate_to_threshold(rate_grid[i])));
  }
  return out;
}

std::vector<double> empirical_capacity_cdf(std::span<const double> samples,
                                           std::span<const double> rate_grid) {
  return empirical_capacity_cdf(EmpiricalCdf(std::vector<double>(samples.begin(), samples.end())),
                                rate_grid);
}

}  // namespace comp
