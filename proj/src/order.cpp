// SPDX-License-Identifier: Apache-2.0

#include "ztc/order.hpp"

#include <cmath>

#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {

std::string_view to_string(UnitKind kind) {
  switch (kind) {
    case UnitKind::kCu: return "CU";
    case UnitKind::kDu: return "DU";
    case UnitKind::kRu: return "RU";
  }
  return "CU";
}

std::string_view short_name(UnitKind kind) {
  switch (kind) {
    case UnitKind::kCu: return "cu";
    case UnitKind::kDu: return "du";
    case UnitKind::kRu: return "ru";
  }
  return "cu";
}

UnitKind parse_unit_kind(std::string_view text) {
  if (text == "CU" || text == "cu") return UnitKind::kCu;
  if (text == "DU" || text == "du") return UnitKind::kDu;
  if (text == "RU" || text == "ru") return UnitKind::kRu;
  throw Error(ErrorCode::kParse, "unknown unit kind \"" + std::string(text) + "\"");
}

const ResourceDemand& PerUnitDemand::of(UnitKind kind) const {
  switch (kind) {
    case UnitKind::kCu: return cu;
    case UnitKind::kDu: return du;
    case UnitKind::kRu: return ru;
  }
  return cu;
}

double default_fronthaul_bandwidth_mbps(std::int64_t maxUsers) {
  return 1000.0 * static_cast<double>(maxUsers) / 32.0;
}

const std::string& ChainCandidate::node_for(UnitKind kind) const {
  switch (kind) {
    case UnitKind::kCu: return cuNodeId;
    case UnitKind::kDu: return duNodeId;
    case UnitKind::kRu: return ruNodeId;
  }
  return cuNodeId;
}

void validate_order(const ServiceOrder& order) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!is_valid(order.coverageCenter)) {
    throw Error(ErrorCode::kInvalidArgument, "coverageCenter out of range");
  }
  if (!positive(order.coverageRadiusKm)) {
    throw Error(ErrorCode::kInvalidArgument, "coverageRadiusKm must be > 0");
  }
  if (order.maxUsers <= 0) throw Error(ErrorCode::kInvalidArgument, "maxUsers must be > 0");
  const auto& c = order.constraints;
  if (!positive(c.fronthaulLatencyMsMax) || !positive(c.midhaulLatencyMsMax) ||
      !positive(c.endToEndLatencyMsMax) || !positive(c.fronthaulBandwidthMbpsMin)) {
    throw Error(ErrorCode::kInvalidArgument, "latency and bandwidth constraints must be > 0");
  }
  for (auto kind : kAllUnitKinds) {
    if (!c.perUnitDemand.of(kind).non_negative()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "perUnitDemand." + std::string(short_name(kind)) + " must be >= 0");
    }
  }
}

namespace {

ResourceDemand demand_from_json(const nlohmann::json& j, std::string_view where) {
  json_util::require_object(j, where);
  json_util::reject_unknown(j, {"cpuMillicores", "ramMb", "diskMb"}, where);
  return {json_util::require_non_negative_int(j, "cpuMillicores", where),
          json_util::require_non_negative_int(j, "ramMb", where),
          json_util::require_non_negative_int(j, "diskMb", where)};
}

nlohmann::json demand_to_json(const ResourceDemand& d) {
  return {{"cpuMillicores", d.cpuMillicores}, {"ramMb", d.ramMb}, {"diskMb", d.diskMb}};
}

}  // namespace

ServiceOrder order_from_json(const nlohmann::json& j) {
  json_util::require_object(j, "order");
  json_util::reject_unknown(
      j, {"tag", "coverageCenter", "coverageRadiusKm", "maxUsers", "spectrumBand", "constraints"},
      "order");
  ServiceOrder order;
  order.tag = json_util::require_string(j, "tag", "order");
  if (!j.contains("coverageCenter")) throw Error(ErrorCode::kParse, "order: missing field \"coverageCenter\"");
  const auto& center = j["coverageCenter"];
  json_util::require_object(center, "coverageCenter");
  json_util::reject_unknown(center, {"lat", "lon"}, "coverageCenter");
  order.coverageCenter = {json_util::require_number(center, "lat", "coverageCenter"),
                          json_util::require_number(center, "lon", "coverageCenter")};
  order.coverageRadiusKm = json_util::require_number(j, "coverageRadiusKm", "order");
  order.maxUsers = json_util::require_int(j, "maxUsers", "order");
  order.spectrumBand = json_util::require_string(j, "spectrumBand", "order");
  order.constraints.fronthaulBandwidthMbpsMin = default_fronthaul_bandwidth_mbps(order.maxUsers);
  if (j.contains("constraints")) {
    const auto& c = j["constraints"];
    json_util::require_object(c, "constraints");
    json_util::reject_unknown(c,
                              {"fronthaulLatencyMsMax", "midhaulLatencyMsMax", "endToEndLatencyMsMax",
                               "fronthaulBandwidthMbpsMin", "perUnitDemand"},
                              "constraints");
    auto& oc = order.constraints;
    if (c.contains("fronthaulLatencyMsMax"))
      oc.fronthaulLatencyMsMax = json_util::require_number(c, "fronthaulLatencyMsMax", "constraints");
    if (c.contains("midhaulLatencyMsMax"))
      oc.midhaulLatencyMsMax = json_util::require_number(c, "midhaulLatencyMsMax", "constraints");
    if (c.contains("endToEndLatencyMsMax"))
      oc.endToEndLatencyMsMax = json_util::require_number(c, "endToEndLatencyMsMax", "constraints");
    if (c.contains("fronthaulBandwidthMbpsMin"))
      oc.fronthaulBandwidthMbpsMin = json_util::require_number(c, "fronthaulBandwidthMbpsMin", "constraints");
    if (c.contains("perUnitDemand")) {
      const auto& d = c["perUnitDemand"];
      json_util::require_object(d, "perUnitDemand");
      json_util::reject_unknown(d, {"cu", "du", "ru"}, "perUnitDemand");
      if (d.contains("cu")) oc.perUnitDemand.cu = demand_from_json(d["cu"], "perUnitDemand.cu");
      if (d.contains("du")) oc.perUnitDemand.du = demand_from_json(d["du"], "perUnitDemand.du");
      if (d.contains("ru")) oc.perUnitDemand.ru = demand_from_json(d["ru"], "perUnitDemand.ru");
    }
  }
  try {
    validate_order(order);
  } catch (const Error& e) {
    throw Error(ErrorCode::kParse, std::string("order: ") + e.what());
  }
  return order;
}

ServiceOrder parse_order(std::string_view document) {
  return order_from_json(json_util::parse(document));
}

nlohmann::json order_to_json(const ServiceOrder& order) {
  const auto& c = order.constraints;
  return {{"tag", order.tag},
          {"coverageCenter", {{"lat", order.coverageCenter.latitudeDeg}, {"lon", order.coverageCenter.longitudeDeg}}},
          {"coverageRadiusKm", order.coverageRadiusKm},
          {"maxUsers", order.maxUsers},
          {"spectrumBand", order.spectrumBand},
          {"constraints",
           {{"fronthaulLatencyMsMax", c.fronthaulLatencyMsMax},
            {"midhaulLatencyMsMax", c.midhaulLatencyMsMax},
            {"endToEndLatencyMsMax", c.endToEndLatencyMsMax},
            {"fronthaulBandwidthMbpsMin", c.fronthaulBandwidthMbpsMin},
            {"perUnitDemand",
             {{"cu", demand_to_json(c.perUnitDemand.cu)},
              {"du", demand_to_json(c.perUnitDemand.du)},
              {"ru", demand_to_json(c.perUnitDemand.ru)}}}}}};
}

nlohmann::json chain_to_json(const ChainCandidate& chain) {
  nlohmann::json j = {{"cuNodeId", chain.cuNodeId},
                      {"duNodeId", chain.duNodeId},
                      {"ruNodeId", chain.ruNodeId},
                      {"antennaSerial", chain.antennaSerial}};
  j["score"] = chain.score ? nlohmann::json(*chain.score) : nlohmann::json(nullptr);
  return j;
}

ChainCandidate chain_from_json(const nlohmann::json& j) {
  ChainCandidate c;
  c.cuNodeId = json_util::require_string(j, "cuNodeId", "chain");
  c.duNodeId = json_util::require_string(j, "duNodeId", "chain");
  c.ruNodeId = json_util::require_string(j, "ruNodeId", "chain");
  c.antennaSerial = json_util::require_string(j, "antennaSerial", "chain");
  if (j.contains("score") && !j["score"].is_null()) c.score = j["score"].get<double>();
  return c;
}

}  // namespace ztc
