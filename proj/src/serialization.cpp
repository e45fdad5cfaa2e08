#include "comp/serialization.hpp"

#include <fstream>
#include <stdexcept>

namespace comp {

using nlohmann::json;

json to_json(const PropagationParams& p) {
  return {{"pathloss_intercept_db", p.pathloss_intercept_db},
          {"pathloss_slope_db", p.pathloss_slope_db},
          {"shadowing_stddev_db", p.shadowing_stddev_db},
          {"min_distance_m", p.min_distance_m}};
}

PropagationParams propagation_from_json(const json& j) {
  PropagationParams p;
  p.pathloss_intercept_db = j.value("pathloss_intercept_db", p.pathloss_intercept_db);
  p.pathloss_slope_db = j.value("pathloss_slope_db", p.pathloss_slope_db);
  p.shadowing_stddev_db = j.value("shadowing_stddev_db", p.shadowing_stddev_db);
  p.min_distance_m = j.value("min_distance_m", p.min_distance_m);
  p.validate();
  return p;
}

json to_json(const DeploymentDocument& doc) {
  const Deployment& d = doc.deployment;
  json stations = json::array();
  for (const BaseStation& bs : d.stations)
    stations.push_back({{"id", bs.id},
                        {"x", bs.position.x},
                        {"y", bs.position.y},
                        {"tx_power_w", bs.tx_power_w}});
  return {{"area",
           {{"x", d.area.origin.x},
            {"y", d.area.origin.y},
            {"width_m", d.area.width_m},
            {"height_m", d.area.height_m}}},
          {"density_per_km2", d.density_per_km2},
          {"count_mode", to_string(d.count_mode)},
          {"seed", d.seed},
          {"propagation", to_json(doc.propagation)},
          {"stations", std::move(stations)}};
}

DeploymentDocument deployment_from_json(const json& j) {
  try {
    DeploymentDocument doc;
    Deployment& d = doc.deployment;
    const json& area = j.at("area");
    d.area.origin = {area.value("x", 0.0), area.value("y", 0.0)};
    d.area.width_m = area.at("width_m").get<double>();
    d.area.height_m = area.at("height_m").get<double>();
    d.density_per_km2 = j.at("density_per_km2").get<double>();
    d.count_mode = count_mode_from_string(j.value("count_mode", std::string("exact")));
    d.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("propagation")) doc.propagation = propagation_from_json(j.at("propagation"));
    for (const json& s : j.at("stations")) {
      BaseStation bs;
      bs.id = s.at("id").get<std::uint32_t>();
      bs.position = {s.at("x").get<double>(), s.at("y").get<double>()};
      bs.tx_power_w = s.value("tx_power_w", 1.0);
      if (!(bs.tx_power_w > 0.0)) throw std::invalid_argument("transmit power must be positive");
      if (!d.area.contains(bs.position))
        throw std::invalid_argument("station " + std::to_string(bs.id) + " lies outside the area");
      d.stations.push_back(bs);
    }
    if (d.stations.empty()) throw std::invalid_argument("deployment has no stations");
    return doc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed deployment document: ") + e.what());
  }
}

void save_deployment(const std::filesystem::path& path, const DeploymentDocument& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(doc).dump(2) << '\n';
}

DeploymentDocument load_deployment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("cannot parse " + path.string() + ": " + e.what());
  }
  return deployment_from_json(j);
}

}  // namespace comp
