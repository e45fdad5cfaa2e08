#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace comp {

/// Average received powers (linear scale) from a group of base stations.
/// Every value is finite and strictly positive.
class PowerSet {
 public:
  PowerSet() = default;
  PowerSet(std::initializer_list<double> values);
  explicit PowerSet(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

/// A downlink with a cooperating serving set and everything else as
/// interference. This is an outage query without its SINR threshold.
struct LinkQuery {
  PowerSet serving;
  PowerSet interferers;
  double noise_power = 0.0;

  /// Throws std::invalid_argument if the serving set is empty or the noise
  /// power is negative or non-finite.
  void validate() const;
};

struct OutageQuery {
  LinkQuery link;
  double threshold = 0.0;  // linear SINR

  void validate() const;
};

/// Splits powers sorted in descending order into the `k` strongest
/// (serving) and the rest (interferers).
LinkQuery nested_link(std::span<const double> powers_desc, std::size_t k, double noise_power);

/// SINR threshold matching a rate in bit/s/Hz: 2^R - 1.
double rate_to_threshold(double rate) noexcept;

/// Rate matching an SINR threshold: log2(1 + g).
double threshold_to_rate(double threshold) noexcept;

}  // namespace comp
