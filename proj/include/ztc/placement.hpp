// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ztc/catalogs.hpp"
#include "ztc/order.hpp"
#include "ztc/substrate.hpp"

namespace ztc {

struct PlacementPolicy {
  // CU on Regional, DU on Edge, RU on FarEdge (O-RAN Scenario F). When false
  // any tier may host any unit; RUs still need antennas, hence FarEdge nodes.
  bool enforceTierMapping = true;
};

struct RoleCandidates {
  std::vector<std::string> cuNodes;
  std::vector<std::string> duNodes;
  std::vector<std::string> ruNodes;
  std::map<std::string, std::vector<std::string>> antennasByRuNode;

  bool operator==(const RoleCandidates&) const = default;
};

template <typename T>
struct PerUnit {
  T cu{};
  T du{};
  T ru{};

  T& of(UnitKind kind) { return kind == UnitKind::kCu ? cu : kind == UnitKind::kDu ? du : ru; }
  const T& of(UnitKind kind) const {
    return kind == UnitKind::kCu ? cu : kind == UnitKind::kDu ? du : ru;
  }
  bool operator==(const PerUnit&) const = default;
};

struct ProbeReport {
  double fronthaulLatencyMs = 0.0;
  double midhaulLatencyMs = 0.0;
  double endToEndLatencyMs = 0.0;
  double fronthaulBandwidthMbps = 0.0;
  PerUnit<bool> capacityOk;
  // Fraction of each hosting node's CPU left free once the chain is placed.
  PerUnit<double> cpuFreeFractionAfter;
  double coverageDistanceKm = 0.0;
  bool pass = false;
  std::vector<std::string> violations;

  bool operator==(const ProbeReport&) const = default;
};

nlohmann::json probe_to_json(const ProbeReport& probe);

// Candidate hosts per role, filtered by tier, free capacity and (for
// RUs) free antennas inside the coverage disc.
RoleCandidates discover(const ServiceOrder& order, const std::vector<ResourceCatalogEntry>& catalog,
                        const Topology& topology, const PlacementPolicy& policy = {});

// cu x du x (ru, antenna), ordered by (ru, du, cu, antenna).
std::vector<ChainCandidate> enumerate_chains(const RoleCandidates& candidates);

// Latency, bandwidth, capacity and coverage probe. Capacity is judged
// against the topology's live counters, with the demand of co-located units
// summed per node.
ProbeReport validate_chain(const ChainCandidate& chain, const ServiceOrder& order,
                           const Topology& topology);

inline constexpr double kLatencyWeight = 0.4;
inline constexpr double kBandwidthWeight = 0.2;
inline constexpr double kComputeWeight = 0.2;
inline constexpr double kProximityWeight = 0.2;

struct ScoreBreakdown {
  double latencySlack = 0.0;
  double bandwidthSlack = 0.0;
  double computeSlack = 0.0;
  double proximitySlack = 0.0;
  double score = 0.0;
};

ScoreBreakdown score_breakdown(const ProbeReport& probe, const ServiceOrder& order);
// Throws Error(kInvalidArgument) on a failed probe.
double score_chain(const ChainCandidate& chain, const ProbeReport& probe, const ServiceOrder& order);

struct Infeasible {
  std::string reason;
  bool operator==(const Infeasible&) const = default;
};
using Selection = std::variant<ChainCandidate, Infeasible>;

inline constexpr const char* kNoCandidateReason = "infeasible: no candidate chain";

// Highest score wins; equal scores fall back to the smaller (ru, du, cu,
// antenna) tuple. Unscored inputs are ignored.
Selection select_best(const std::vector<ChainCandidate>& scored);

struct PlacementTrace {
  RoleCandidates candidates;
  std::vector<ChainCandidate> enumerated;
  std::vector<std::pair<ChainCandidate, ProbeReport>> probes;
  std::vector<ChainCandidate> scored;
  Selection selection;
};

// discover -> enumerate -> validate -> score -> select.
PlacementTrace place(const ServiceOrder& order, const std::vector<ResourceCatalogEntry>& catalog,
                     const Topology& topology, const PlacementPolicy& policy = {});

// Exhaustive reference: every (cu, du, ru, antenna) over all nodes, filtered
// by tier, antenna availability and validate_chain, then argmax with the same
// tie-break. Intended for desk-scale topologies.
Selection oracle_select(const ServiceOrder& order, const std::vector<ResourceCatalogEntry>& catalog,
                        const Topology& topology, const PlacementPolicy& policy = {});

nlohmann::json selection_to_json(const Selection& selection);

}  // namespace ztc
