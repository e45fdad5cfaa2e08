#pragma once

// JSON documents for deployments. Doubles are written with round-trip
// precision, so a loaded deployment replays bit-exactly.

#include <filesystem>

#include "json.hpp"

#include "comp/network.hpp"

namespace comp {

struct DeploymentDocument {
  Deployment deployment;
  PropagationParams propagation;
};

nlohmann::json to_json(const PropagationParams& params);
PropagationParams propagation_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DeploymentDocument& doc);
DeploymentDocument deployment_from_json(const nlohmann::json& j);

void save_deployment(const std::filesystem::path& path, const DeploymentDocument& doc);
DeploymentDocument load_deployment(const std::filesystem::path& path);

}  // namespace comp
