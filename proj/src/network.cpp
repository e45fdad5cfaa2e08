#include "comp/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "comp/rng.hpp"

namespace comp {

bool Region::contains(Point p) const noexcept {
  return p.x >= origin.x && p.x <= origin.x + width_m && p.y >= origin.y &&
         p.y <= origin.y + height_m;
}

Region Region::centered(double width, double height) const noexcept {
  return {{origin.x + 0.5 * (width_m - width), origin.y + 0.5 * (height_m - height)}, width, height};
}

std::string to_string(CountMode mode) { return mode == CountMode::exact ? "exact" : "poisson"; }

CountMode count_mode_from_string(const std::string& s) {
  if (s == "exact") return CountMode::exact;
  if (s == "poisson") return CountMode::poisson;
  throw std::invalid_argument("unknown count mode '" + s + "'");
}

void PropagationParams::validate() const {
  if (!(pathloss_intercept_db >= 0.0) || !(pathloss_slope_db >= 0.0) ||
      !(shadowing_stddev_db >= 0.0) || !(min_distance_m > 0.0))
    throw std::invalid_argument("propagation parameters must be non-negative (min distance > 0)");
}

PathGain path_gain_db(double distance_m, double shadowing_db, const PropagationParams& params) {
  PathGain g;
  double d = distance_m;
  if (!(d >= params.min_distance_m)) {
    d = params.min_distance_m;
    g.clamped = true;
  }
  g.gain_db = -(params.pathloss_intercept_db + params.pathloss_slope_db * std::log10(d) + shadowing_db);
  return g;
}

Deployment generate_deployment(double density_per_km2, const Region& area, std::uint64_t seed,
                               CountMode mode, double tx_power_w) {
  if (!(density_per_km2 > 0.0) || !std::isfinite(density_per_km2))
    throw std::invalid_argument("density must be positive");
  if (!(area.width_m > 0.0) || !(area.height_m > 0.0))
    throw std::invalid_argument("deployment area must be positive");
  if (!(tx_power_w > 0.0)) throw std::invalid_argument("transmit power must be positive");

  Deployment d;
  d.area = area;
  d.density_per_km2 = density_per_km2;
  d.count_mode = mode;
  d.seed = seed;

  std::mt19937_64 gen(rng::derive(seed, 1));
  const double expected = density_per_km2 * area.area_km2();
  std::size_t count = 0;
  if (mode == CountMode::exact) {
    // Guard against 100 * 0.01 landing a hair above 1.
    count = static_cast<std::size_t>(std::ceil(expected * (1.0 - 1e-12)));
  } else {
    count = std::poisson_distribution<std::size_t>(expected)(gen);
  }
  count = std::max<std::size_t>(count, 1);

  std::uniform_real_distribution<double> ux(area.origin.x, area.origin.x + area.width_m);
  std::uniform_real_distribution<double> uy(area.origin.y, area.origin.y + area.height_m);
  d.stations.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = ux(gen);
    const double y = uy(gen);
    d.stations.push_back({static_cast<std::uint32_t>(i), {x, y}, tx_power_w});
  }
  return d;
}

std::vector<double> ReceivedPowerProfile::powers() const {
  std::vector<double> p;
  p.reserve(entries.size());
  for (const auto& e : entries) p.push_back(e.power);
  return p;
}

ReceivedPowerProfile compute_profile(const Deployment& deployment, const PropagationParams& params,
                                     Point user, std::uint64_t seed) {
  params.validate();
  if (!deployment.area.contains(user))
    throw std::invalid_argument("user position lies outside the deployment area");

  std::mt19937_64 gen(rng::derive(seed, 2));
  std::normal_distribution<double> shadowing(0.0, 1.0);

  ReceivedPowerProfile profile;
  profile.user_position = user;
  profile.entries.reserve(deployment.stations.size());
  for (const BaseStation& bs : deployment.stations) {
    const double delta = params.shadowing_stddev_db * shadowing(gen);
    const double distance = std::hypot(bs.position.x - user.x, bs.position.y - user.y);
    const PathGain g = path_gain_db(distance, delta, params);
    if (g.clamped) ++profile.clamped_links;
    profile.entries.push_back({bs.id, bs.tx_power_w * std::pow(10.0, g.gain_db / 10.0)});
  }
  std::stable_sort(profile.entries.begin(), profile.entries.end(),
                   [](const ProfileEntry& a, const ProfileEntry& b) { return a.power > b.power; });
  return profile;
}

Point sample_position(const Region& region, std::uint64_t seed) {
  std::mt19937_64 gen(rng::derive(seed, 3));
  std::uniform_real_distribution<double> ux(region.origin.x, region.origin.x + region.width_m);
  std::uniform_real_distribution<double> uy(region.origin.y, region.origin.y + region.height_m);
  const double x = ux(gen);
  const double y = uy(gen);
  return {x, y};
}

}  // namespace comp
