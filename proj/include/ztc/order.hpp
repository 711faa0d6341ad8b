// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <tuple>

#include <json.hpp>

#include "ztc/geo.hpp"
#include "ztc/substrate.hpp"

namespace ztc {

enum class UnitKind { kCu, kDu, kRu };

inline constexpr UnitKind kAllUnitKinds[] = {UnitKind::kCu, UnitKind::kDu, UnitKind::kRu};

std::string_view to_string(UnitKind kind);       // "CU", "DU", "RU"
std::string_view short_name(UnitKind kind);      // "cu", "du", "ru"
UnitKind parse_unit_kind(std::string_view text);  // accepts either form

struct PerUnitDemand {
  ResourceDemand cu{1000, 1024, 2048};
  ResourceDemand du{2000, 2048, 2048};
  ResourceDemand ru{1500, 1024, 1024};

  const ResourceDemand& of(UnitKind kind) const;
  bool operator==(const PerUnitDemand&) const = default;
};

// Fronthaul bandwidth needed by a split 7.3 RU serving `maxUsers`; 1000 Mbps
// per 32 users, scaled linearly.
double default_fronthaul_bandwidth_mbps(std::int64_t maxUsers);

inline constexpr double kDefaultFronthaulLatencyMsMax = 1.0;
inline constexpr double kDefaultMidhaulLatencyMsMax = 10.0;
inline constexpr double kDefaultEndToEndLatencyMsMax = 1.0;

struct OrderConstraints {
  double fronthaulLatencyMsMax = kDefaultFronthaulLatencyMsMax;  // RU-DU
  double midhaulLatencyMsMax = kDefaultMidhaulLatencyMsMax;      // DU-CU
  double endToEndLatencyMsMax = kDefaultEndToEndLatencyMsMax;    // RU-CU
  double fronthaulBandwidthMbpsMin = 1000.0;
  PerUnitDemand perUnitDemand;

  bool operator==(const OrderConstraints&) const = default;
};

struct ServiceOrder {
  std::string tag;
  GeoPosition coverageCenter;
  double coverageRadiusKm = 1.0;
  std::int64_t maxUsers = 32;
  std::string spectrumBand;
  OrderConstraints constraints;

  bool operator==(const ServiceOrder&) const = default;
};

// Throws Error(kInvalidArgument) when a numeric field is out of range.
void validate_order(const ServiceOrder& order);

// Strict parse of an order document; omitted constraints take their defaults.
ServiceOrder order_from_json(const nlohmann::json& j);
ServiceOrder parse_order(std::string_view document);
nlohmann::json order_to_json(const ServiceOrder& order);

// One (CU node, DU node, RU node, antenna) assignment.
struct ChainCandidate {
  std::string cuNodeId;
  std::string duNodeId;
  std::string ruNodeId;
  std::string antennaSerial;
  std::optional<double> score;

  // Ordering key used for enumeration and tie-breaks.
  auto key() const { return std::tie(ruNodeId, duNodeId, cuNodeId, antennaSerial); }
  bool same_assignment(const ChainCandidate& o) const { return key() == o.key(); }
  const std::string& node_for(UnitKind kind) const;

  bool operator==(const ChainCandidate&) const = default;
};

nlohmann::json chain_to_json(const ChainCandidate& chain);
ChainCandidate chain_from_json(const nlohmann::json& j);

}  // namespace ztc
