// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztc/order.hpp"
#include "ztc/substrate.hpp"

namespace ztc {

// Helm-chart analog for one RAN unit.
struct Manifest {
  UnitKind unitKind = UnitKind::kCu;
  std::string targetNodeId;
  std::string imageName;
  ResourceDemand resourceRequest;
  std::map<std::string, std::string> parameters;

  bool operator==(const Manifest&) const = default;
};

std::string image_for(UnitKind kind);  // "oai-cu", "oai-du", "oai-ru"

// Shortest round-trip decimal form, used for every numeric parameter.
std::string format_number(double v);

// Exactly three manifests in CU, DU, RU order.
std::vector<Manifest> render_manifests(const ChainCandidate& chain, const ServiceOrder& order);

nlohmann::json manifest_to_json(const Manifest& manifest);

// Writes <dir>/<deploymentId>/<cu|du|ru>.json.
void write_manifests(const std::filesystem::path& dir, const std::string& deploymentId,
                     const std::vector<Manifest>& manifests);

}  // namespace ztc
