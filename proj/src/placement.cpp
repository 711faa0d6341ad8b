// SPDX-License-Identifier: Apache-2.0

#include "ztc/placement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {

namespace {

double clamp01(double v) {
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

bool tier_allows(const PlacementPolicy& policy, UnitKind kind, CloudTier tier) {
  if (kind == UnitKind::kRu) return tier == CloudTier::kFarEdge;
  if (!policy.enforceTierMapping) return true;
  return kind == UnitKind::kCu ? tier == CloudTier::kRegional : tier == CloudTier::kEdge;
}

const GeoPosition* antenna_position(const Node& node, const std::string& serial) {
  for (const auto& a : node.antennas) {
    if (a.serial == serial) return &a.position;
  }
  return nullptr;
}

bool within_coverage(double distanceKm, double radiusKm) {
  // A zero radius requires the antenna exactly at the center.
  return radiusKm <= 0.0 ? distanceKm == 0.0 : distanceKm <= radiusKm;
}

// True when `a` should be preferred over `b`.
bool better(const ChainCandidate& a, const ChainCandidate& b) {
  if (*a.score != *b.score) return *a.score > *b.score;
  return a.key() < b.key();
}

}  // namespace

RoleCandidates discover(const ServiceOrder& order, const std::vector<ResourceCatalogEntry>& catalog,
                        const Topology& topology, const PlacementPolicy& policy) {
  RoleCandidates out;
  const auto& demand = order.constraints.perUnitDemand;
  for (const auto& entry : catalog) {
    if (!topology.contains(entry.nodeId)) continue;
    const Node& node = topology.node(entry.nodeId);
    const auto free = entry.free();
    if (tier_allows(policy, UnitKind::kCu, entry.tier) && demand.cu.fits_within(free)) {
      out.cuNodes.push_back(entry.nodeId);
    }
    if (tier_allows(policy, UnitKind::kDu, entry.tier) && demand.du.fits_within(free)) {
      out.duNodes.push_back(entry.nodeId);
    }
    if (tier_allows(policy, UnitKind::kRu, entry.tier) && demand.ru.fits_within(free)) {
      std::vector<std::string> in_range;
      for (const auto& serial : entry.antennaSerialsAvailable) {
        const GeoPosition* pos = antenna_position(node, serial);
        if (pos == nullptr) continue;
        if (within_coverage(geo_distance_km(*pos, order.coverageCenter), order.coverageRadiusKm)) {
          in_range.push_back(serial);
        }
      }
      if (!in_range.empty()) {
        std::sort(in_range.begin(), in_range.end());
        out.ruNodes.push_back(entry.nodeId);
        out.antennasByRuNode.emplace(entry.nodeId, std::move(in_range));
      }
    }
  }
  auto sort_unique = [](std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  sort_unique(out.cuNodes);
  sort_unique(out.duNodes);
  sort_unique(out.ruNodes);
  return out;
}

std::vector<ChainCandidate> enumerate_chains(const RoleCandidates& candidates) {
  std::vector<ChainCandidate> chains;
  for (const auto& ru : candidates.ruNodes) {
    auto it = candidates.antennasByRuNode.find(ru);
    if (it == candidates.antennasByRuNode.end()) continue;
    for (const auto& du : candidates.duNodes) {
      for (const auto& cu : candidates.cuNodes) {
        for (const auto& serial : it->second) {
          chains.push_back({cu, du, ru, serial, std::nullopt});
        }
      }
    }
  }
  std::sort(chains.begin(), chains.end(),
            [](const ChainCandidate& a, const ChainCandidate& b) { return a.key() < b.key(); });
  return chains;
}

ProbeReport validate_chain(const ChainCandidate& chain, const ServiceOrder& order,
                           const Topology& topology) {
  const auto& c = order.constraints;
  ProbeReport r;
  const auto fronthaul = topology.path_metrics(chain.ruNodeId, chain.duNodeId);
  const auto midhaul = topology.path_metrics(chain.duNodeId, chain.cuNodeId);
  const auto end_to_end = topology.path_metrics(chain.ruNodeId, chain.cuNodeId);
  r.fronthaulLatencyMs = fronthaul.latencyMs;
  r.midhaulLatencyMs = midhaul.latencyMs;
  r.endToEndLatencyMs = end_to_end.latencyMs;
  r.fronthaulBandwidthMbps = fronthaul.bandwidthMbps;

  std::map<std::string, ResourceDemand> per_node;
  for (auto kind : kAllUnitKinds) per_node[chain.node_for(kind)] += c.perUnitDemand.of(kind);
  for (auto kind : kAllUnitKinds) {
    const Node& node = topology.node(chain.node_for(kind));
    const ResourceDemand& total = per_node[node.id];
    r.capacityOk.of(kind) = total.fits_within(node.free());
    r.cpuFreeFractionAfter.of(kind) =
        node.cpuCapacityMillicores > 0
            ? static_cast<double>(node.free().cpuMillicores - total.cpuMillicores) /
                  static_cast<double>(node.cpuCapacityMillicores)
            : 0.0;
  }

  const Node& ru_node = topology.node(chain.ruNodeId);
  const GeoPosition* pos = antenna_position(ru_node, chain.antennaSerial);
  r.coverageDistanceKm = pos != nullptr ? geo_distance_km(*pos, order.coverageCenter)
                                        : std::numeric_limits<double>::infinity();

  auto fail = [&r](const std::string& why) { r.violations.push_back(why); };
  if (pos == nullptr) fail("antenna " + chain.antennaSerial + " not on node " + chain.ruNodeId);
  if (!(r.fronthaulLatencyMs <= c.fronthaulLatencyMsMax)) fail("fronthaul latency");
  if (!(r.midhaulLatencyMs <= c.midhaulLatencyMsMax)) fail("midhaul latency");
  if (!(r.endToEndLatencyMs <= c.endToEndLatencyMsMax)) fail("end-to-end latency");
  if (!(r.fronthaulBandwidthMbps >= c.fronthaulBandwidthMbpsMin)) fail("fronthaul bandwidth");
  for (auto kind : kAllUnitKinds) {
    if (!r.capacityOk.of(kind)) fail(std::string(short_name(kind)) + " node capacity");
  }
  if (!within_coverage(r.coverageDistanceKm, order.coverageRadiusKm)) fail("antenna outside coverage");
  r.pass = r.violations.empty();
  return r;
}

ScoreBreakdown score_breakdown(const ProbeReport& probe, const ServiceOrder& order) {
  const auto& c = order.constraints;
  ScoreBreakdown s;
  auto latency_slack = [](double budget, double measured) { return clamp01((budget - measured) / budget); };
  s.latencySlack = (latency_slack(c.fronthaulLatencyMsMax, probe.fronthaulLatencyMs) +
                    latency_slack(c.midhaulLatencyMsMax, probe.midhaulLatencyMs) +
                    latency_slack(c.endToEndLatencyMsMax, probe.endToEndLatencyMs)) /
                   3.0;
  if (std::isinf(probe.fronthaulBandwidthMbps)) {
    s.bandwidthSlack = 1.0;
  } else {
    s.bandwidthSlack =
        clamp01((probe.fronthaulBandwidthMbps - c.fronthaulBandwidthMbpsMin) / c.fronthaulBandwidthMbpsMin);
  }
  s.computeSlack = (clamp01(probe.cpuFreeFractionAfter.cu) + clamp01(probe.cpuFreeFractionAfter.du) +
                    clamp01(probe.cpuFreeFractionAfter.ru)) /
                   3.0;
  s.proximitySlack = order.coverageRadiusKm > 0.0
                         ? clamp01(1.0 - probe.coverageDistanceKm / order.coverageRadiusKm)
                         : (probe.coverageDistanceKm == 0.0 ? 1.0 : 0.0);
  s.score = clamp01(kLatencyWeight * s.latencySlack + kBandwidthWeight * s.bandwidthSlack +
                    kComputeWeight * s.computeSlack + kProximityWeight * s.proximitySlack);
  return s;
}

double score_chain(const ChainCandidate& chain, const ProbeReport& probe, const ServiceOrder& order) {
  if (!probe.pass) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot score failed chain " + chain.ruNodeId + "/" + chain.duNodeId + "/" + chain.cuNodeId);
  }
  return score_breakdown(probe, order).score;
}

Selection select_best(const std::vector<ChainCandidate>& scored) {
  const ChainCandidate* best = nullptr;
  for (const auto& chain : scored) {
    if (!chain.score) continue;
    if (best == nullptr || better(chain, *best)) best = &chain;
  }
  if (best == nullptr) return Infeasible{kNoCandidateReason};
  return *best;
}

PlacementTrace place(const ServiceOrder& order, const std::vector<ResourceCatalogEntry>& catalog,
                     const Topology& topology, const PlacementPolicy& policy) {
  PlacementTrace t{};
  t.candidates = discover(order, catalog, topology, policy);
  t.enumerated = enumerate_chains(t.candidates);
  for (const auto& chain : t.enumerated) {
    auto probe = validate_chain(chain, order, topology);
    if (probe.pass) {
      ChainCandidate scored = chain;
      scored.score = score_chain(chain, probe, order);
      t.scored.push_back(std::move(scored));
    }
    t.probes.emplace_back(chain, std::move(probe));
  }
  t.selection = select_best(t.scored);
  return t;
}

Selection oracle_select(const ServiceOrder& order, const std::vector<ResourceCatalogEntry>& catalog,
                        const Topology& topology, const PlacementPolicy& policy) {
  std::map<std::string, std::vector<std::string>> free_antennas;
  for (const auto& entry : catalog) free_antennas[entry.nodeId] = entry.antennaSerialsAvailable;

  std::optional<ChainCandidate> best;
  for (const auto& [cu_id, cu] : topology.nodes()) {
    if (!tier_allows(policy, UnitKind::kCu, cu.tier)) continue;
    for (const auto& [du_id, du] : topology.nodes()) {
      if (!tier_allows(policy, UnitKind::kDu, du.tier)) continue;
      for (const auto& [ru_id, ru] : topology.nodes()) {
        if (!tier_allows(policy, UnitKind::kRu, ru.tier)) continue;
        for (const auto& serial : free_antennas[ru_id]) {
          ChainCandidate chain{cu_id, du_id, ru_id, serial, std::nullopt};
          const auto probe = validate_chain(chain, order, topology);
          if (!probe.pass) continue;
          chain.score = score_chain(chain, probe, order);
          if (!best || better(chain, *best)) best = chain;
        }
      }
    }
  }
  if (!best) return Infeasible{kNoCandidateReason};
  return *best;
}

nlohmann::json probe_to_json(const ProbeReport& p) {
  auto per_unit_bool = [](const PerUnit<bool>& v) { return nlohmann::json{{"cu", v.cu}, {"du", v.du}, {"ru", v.ru}}; };
  auto per_unit_double = [](const PerUnit<double>& v) {
    return nlohmann::json{{"cu", v.cu}, {"du", v.du}, {"ru", v.ru}};
  };
  return {{"fronthaulLatencyMs", json_util::finite_or_null(p.fronthaulLatencyMs)},
          {"midhaulLatencyMs", json_util::finite_or_null(p.midhaulLatencyMs)},
          {"endToEndLatencyMs", json_util::finite_or_null(p.endToEndLatencyMs)},
          {"fronthaulBandwidthMbps", json_util::finite_or_null(p.fronthaulBandwidthMbps)},
          {"capacityOk", per_unit_bool(p.capacityOk)},
          {"cpuFreeFractionAfter", per_unit_double(p.cpuFreeFractionAfter)},
          {"coverageDistanceKm", json_util::finite_or_null(p.coverageDistanceKm)},
          {"pass", p.pass},
          {"violations", p.violations}};
}

nlohmann::json selection_to_json(const Selection& selection) {
  if (const auto* chain = std::get_if<ChainCandidate>(&selection)) {
    return {{"result", "selected"}, {"chain", chain_to_json(*chain)}};
  }
  return {{"result", "infeasible"}, {"reason", std::get<Infeasible>(selection).reason}};
}

}  // namespace ztc
