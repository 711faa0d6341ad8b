// SPDX-License-Identifier: Apache-2.0

#include "ztc/manifest.hpp"

#include <charconv>

#include "ztc/json_util.hpp"

namespace ztc {

std::string image_for(UnitKind kind) { return "oai-" + std::string(short_name(kind)); }

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::vector<Manifest> render_manifests(const ChainCandidate& chain, const ServiceOrder& order) {
  std::vector<Manifest> out;
  for (auto kind : kAllUnitKinds) {
    Manifest m;
    m.unitKind = kind;
    m.targetNodeId = chain.node_for(kind);
    m.imageName = image_for(kind);
    m.resourceRequest = order.constraints.perUnitDemand.of(kind);
    m.parameters["tag"] = order.tag;
    m.parameters["maxUsers"] = std::to_string(order.maxUsers);
    m.parameters["spectrumBand"] = order.spectrumBand;
    m.parameters["coverageCenterLat"] = format_number(order.coverageCenter.latitudeDeg);
    m.parameters["coverageCenterLon"] = format_number(order.coverageCenter.longitudeDeg);
    m.parameters["coverageRadiusKm"] = format_number(order.coverageRadiusKm);
    if (kind == UnitKind::kRu) m.parameters["antennaSerial"] = chain.antennaSerial;
    out.push_back(std::move(m));
  }
  return out;
}

nlohmann::json manifest_to_json(const Manifest& m) {
  return {{"unitKind", to_string(m.unitKind)},
          {"targetNodeId", m.targetNodeId},
          {"imageName", m.imageName},
          {"resourceRequest",
           {{"cpuMillicores", m.resourceRequest.cpuMillicores},
            {"ramMb", m.resourceRequest.ramMb},
            {"diskMb", m.resourceRequest.diskMb}}},
          {"parameters", m.parameters}};
}

void write_manifests(const std::filesystem::path& dir, const std::string& deploymentId,
                     const std::vector<Manifest>& manifests) {
  for (const auto& m : manifests) {
    json_util::write_file_atomic(dir / deploymentId / (std::string(short_name(m.unitKind)) + ".json"),
                                 manifest_to_json(m).dump(2) + "\n");
  }
}

}  // namespace ztc
