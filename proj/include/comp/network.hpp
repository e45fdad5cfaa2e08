#pragma once

// Synthetic small-cell deployments and the per-user received power profiles
// that feed the outage model.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace comp {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned rectangle [origin.x, origin.x + width] x [origin.y, origin.y + height], meters.
struct Region {
  Point origin;
  double width_m = 0.0;
  double height_m = 0.0;

  double area_km2() const noexcept { return width_m * height_m * 1e-6; }
  bool contains(Point p) const noexcept;
  /// Centered sub-region of the given size.
  Region centered(double width, double height) const noexcept;
};

enum class CountMode { exact, poisson };

std::string to_string(CountMode mode);
CountMode count_mode_from_string(const std::string& s);

struct BaseStation {
  std::uint32_t id = 0;
  Point position;
  double tx_power_w = 1.0;
};

struct Deployment {
  Region area;
  double density_per_km2 = 0.0;
  CountMode count_mode = CountMode::exact;
  std::uint64_t seed = 0;
  std::vector<BaseStation> stations;
};

struct PropagationParams {
  double pathloss_intercept_db = 34.53;
  double pathloss_slope_db = 38.0;  // per decade of distance
  double shadowing_stddev_db = 8.0;
  double min_distance_m = 1.0;

  void validate() const;
};

struct PathGain {
  double gain_db = 0.0;
  bool clamped = false;  // distance was raised to min_distance_m
};

/// -(intercept + slope*log10(d) + shadowing), with d clamped to min_distance_m.
PathGain path_gain_db(double distance_m, double shadowing_db, const PropagationParams& params = {});

/// Uniform base stations over `area`. Exact mode places ceil(density*area)
/// stations; Poisson mode draws the count. Every station transmits
/// tx_power_w (no power control).
Deployment generate_deployment(double density_per_km2, const Region& area, std::uint64_t seed,
                               CountMode mode = CountMode::exact, double tx_power_w = 1.0);

struct ProfileEntry {
  std::uint32_t bs_id = 0;
  double power = 0.0;  // average received power, linear (W)
};

/// Received powers at one user from every station, strongest first.
struct ReceivedPowerProfile {
  Point user_position;
  std::vector<ProfileEntry> entries;
  std::size_t clamped_links = 0;

  std::vector<double> powers() const;
};

/// One independent N(0, shadowing_stddev^2) draw per station-user link,
/// seeded by `seed`.
ReceivedPowerProfile compute_profile(const Deployment& deployment, const PropagationParams& params,
                                     Point user, std::uint64_t seed);

/// Uniform point inside a region.
Point sample_position(const Region& region, std::uint64_t seed);

}  // namespace comp
