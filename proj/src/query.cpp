#include "comp/query.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace comp {

PowerSet::PowerSet(std::initializer_list<double> values) : PowerSet(std::vector<double>(values)) {}

PowerSet::PowerSet(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("received powers must be finite and strictly positive, got " +
                                  std::to_string(v));
  }
}

void LinkQuery::validate() const {
  if (serving.empty()) throw std::invalid_argument("serving set must not be empty");
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power))
    throw std::invalid_argument("noise power must be finite and non-negative");
}

void OutageQuery::validate() const {
  link.validate();
  if (!(threshold >= 0.0) || !std::isfinite(threshold))
    throw std::invalid_argument("SINR threshold must be finite and non-negative");
}

LinkQuery nested_link(std::span<const double> powers_desc, std::size_t k, double noise_power) {
  if (k == 0 || k > powers_desc.size())
    throw std::invalid_argument("serving set size must be in [1, number of stations]");
  LinkQuery link;
  link.serving = PowerSet(std::vector<double>(powers_desc.begin(), powers_desc.begin() + k));
  link.interferers = PowerSet(std::vector<double>(powers_desc.begin() + k, powers_desc.end()));
  link.noise_power = noise_power;
  return link;
}

double rate_to_threshold(double rate) noexcept { return std::exp2(rate) - 1.0; }

double threshold_to_rate(double threshold) noexcept { return std::log2(1.0 + threshold); }

}  // namespace comp
