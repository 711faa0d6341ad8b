// SPDX-License-Identifier: Apache-2.0

#include "ztc/substrate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <mutex>
#include <queue>
#include <set>
#include <sstream>

#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {

std::string_view to_string(CloudTier tier) {
  switch (tier) {
    case CloudTier::kRegional: return "Regional";
    case CloudTier::kEdge: return "Edge";
    case CloudTier::kFarEdge: return "FarEdge";
  }
  return "Regional";
}

CloudTier parse_tier(std::string_view text) {
  if (text == "Regional") return CloudTier::kRegional;
  if (text == "Edge") return CloudTier::kEdge;
  if (text == "FarEdge") return CloudTier::kFarEdge;
  throw Error(ErrorCode::kParse, "unknown tier \"" + std::string(text) + "\"");
}

std::int64_t latency_ms_to_ns(double latencyMs) {
  return static_cast<std::int64_t>(std::llround(latencyMs * 1e6));
}

Topology::Topology(std::map<std::string, Node> nodes, std::vector<Link> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  validate_and_index();
}

void Topology::validate_and_index() {
  std::set<std::string> serials;
  for (const auto& [id, node] : nodes_) {
    if (id != node.id) throw Error(ErrorCode::kInvalidArgument, "node key mismatch for " + id);
    if (id.empty()) throw Error(ErrorCode::kInvalidArgument, "empty node id");
    if (!is_valid(node.position)) {
      throw Error(ErrorCode::kInvalidArgument, "invalid position for node " + id);
    }
    if (!node.capacity().non_negative() || !node.used().non_negative() ||
        !node.used().fits_within(node.capacity())) {
      throw Error(ErrorCode::kInvalidArgument, "invalid capacity accounting on node " + id);
    }
    if (!node.antennas.empty() && node.tier != CloudTier::kFarEdge) {
      throw Error(ErrorCode::kAntennaOnNonFarEdge, "antenna on non-FarEdge node " + id);
    }
    for (const auto& antenna : node.antennas) {
      if (antenna.serial.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "empty antenna serial on node " + id);
      }
      if (!serials.insert(antenna.serial).second) {
        throw Error(ErrorCode::kDuplicateId, "duplicate antenna serial " + antenna.serial);
      }
      if (!is_valid(antenna.position)) {
        throw Error(ErrorCode::kInvalidArgument, "invalid position for antenna " + antenna.serial);
      }
    }
  }

  adjacency_.clear();
  for (const auto& [id, node] : nodes_) adjacency_[id];
  for (const auto& link : links_) {
    if (!nodes_.contains(link.endpointA) || !nodes_.contains(link.endpointB)) {
      throw Error(ErrorCode::kUnknownNode, "link references unknown node " +
                                               (nodes_.contains(link.endpointA) ? link.endpointB
                                                                                : link.endpointA));
    }
    if (link.endpointA == link.endpointB) {
      throw Error(ErrorCode::kInvalidArgument, "self-loop link on " + link.endpointA);
    }
    if (!(link.latencyMs > 0.0) || !std::isfinite(link.latencyMs)) {
      throw Error(ErrorCode::kInvalidArgument, "link latency must be > 0");
    }
    if (!(link.bandwidthMbps > 0.0) || !std::isfinite(link.bandwidthMbps)) {
      throw Error(ErrorCode::kInvalidArgument, "link bandwidth must be > 0");
    }
    const auto ns = latency_ms_to_ns(link.latencyMs);
    adjacency_[link.endpointA].push_back({link.endpointB, ns, link.bandwidthMbps});
    adjacency_[link.endpointB].push_back({link.endpointA, ns, link.bandwidthMbps});
  }
}

bool Topology::contains(std::string_view id) const { return nodes_.contains(std::string(id)); }

const Node& Topology::node(std::string_view id) const {
  auto it = nodes_.find(std::string(id));
  if (it == nodes_.end()) throw Error(ErrorCode::kUnknownNode, "unknown node " + std::string(id));
  return it->second;
}

Node& Topology::mutable_node(std::string_view id) {
  auto it = nodes_.find(std::string(id));
  if (it == nodes_.end()) throw Error(ErrorCode::kUnknownNode, "unknown node " + std::string(id));
  return it->second;
}

PathMetrics Topology::path_metrics(std::string_view a, std::string_view b) const {
  if (!contains(a)) throw Error(ErrorCode::kUnknownNode, "unknown node " + std::string(a));
  if (!contains(b)) throw Error(ErrorCode::kUnknownNode, "unknown node " + std::string(b));
  if (a == b) return PathMetrics::self();

  // Label = (latency, bottleneck bandwidth) ordered by latency ascending then
  // bandwidth descending. The extension (l + e, min(bw, e_bw)) is isotone in
  // that order, so label-setting Dijkstra is exact.
  struct Label {
    std::int64_t latencyNs;
    double bandwidth;
    std::string node;
    bool operator>(const Label& o) const {
      if (latencyNs != o.latencyNs) return latencyNs > o.latencyNs;
      return bandwidth < o.bandwidth;
    }
  };
  const double kInf = std::numeric_limits<double>::infinity();
  std::map<std::string, std::pair<std::int64_t, double>, std::less<>> best;
  std::set<std::string, std::less<>> settled;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> queue;
  best[std::string(a)] = {0, kInf};
  queue.push({0, kInf, std::string(a)});
  while (!queue.empty()) {
    Label cur = queue.top();
    queue.pop();
    if (settled.contains(cur.node)) continue;
    settled.insert(cur.node);
    if (cur.node == b) return {static_cast<double>(cur.latencyNs) / 1e6, cur.bandwidth};
    for (const auto& edge : adjacency_.find(cur.node)->second) {
      if (settled.contains(edge.to)) continue;
      Label next{cur.latencyNs + edge.latencyNs, std::min(cur.bandwidth, edge.bandwidthMbps), edge.to};
      auto it = best.find(edge.to);
      if (it == best.end() || Label{it->second.first, it->second.second, edge.to} > next) {
        best[edge.to] = {next.latencyNs, next.bandwidth};
        queue.push(std::move(next));
      }
    }
  }
  return PathMetrics::unreachable();
}

std::optional<std::string> Topology::antenna_host(std::string_view serial) const {
  for (const auto& [id, node] : nodes_) {
    for (const auto& antenna : node.antennas) {
      if (antenna.serial == serial) return id;
    }
  }
  return std::nullopt;
}

namespace {

GeoPosition parse_position(const nlohmann::json& j, std::string_view where) {
  json_util::require_object(j, where);
  json_util::reject_unknown(j, {"lat", "lon"}, where);
  GeoPosition p{json_util::require_number(j, "lat", where), json_util::require_number(j, "lon", where)};
  if (!is_valid(p)) throw Error(ErrorCode::kParse, std::string(where) + ": position out of range");
  return p;
}

nlohmann::json position_to_json(const GeoPosition& p) {
  return {{"lat", p.latitudeDeg}, {"lon", p.longitudeDeg}};
}

}  // namespace

Topology load_topology(std::string_view document) {
  const nlohmann::json doc = json_util::parse(document);
  json_util::require_object(doc, "topology");
  json_util::reject_unknown(doc, {"nodes", "links"}, "topology");
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw Error(ErrorCode::kParse, "topology: \"nodes\" must be an array");
  }
  std::map<std::string, Node> nodes;
  for (const auto& jn : doc["nodes"]) {
    json_util::require_object(jn, "node");
    json_util::reject_unknown(jn, {"id", "tier", "position", "cpuMillicores", "ramMb", "diskMb", "antennas"},
                              "node");
    Node node;
    node.id = json_util::require_string(jn, "id", "node");
    const std::string where = "node " + node.id;
    node.tier = parse_tier(json_util::require_string(jn, "tier", where));
    if (!jn.contains("position")) throw Error(ErrorCode::kParse, where + ": missing position");
    node.position = parse_position(jn["position"], where);
    node.cpuCapacityMillicores = json_util::require_non_negative_int(jn, "cpuMillicores", where);
    node.ramCapacityMb = json_util::require_non_negative_int(jn, "ramMb", where);
    node.diskCapacityMb = json_util::require_non_negative_int(jn, "diskMb", where);
    if (jn.contains("antennas")) {
      if (!jn["antennas"].is_array()) throw Error(ErrorCode::kParse, where + ": antennas must be an array");
      for (const auto& ja : jn["antennas"]) {
        json_util::require_object(ja, "antenna");
        json_util::reject_unknown(ja, {"serial", "position"}, "antenna");
        Antenna antenna;
        antenna.serial = json_util::require_string(ja, "serial", "antenna");
        if (!ja.contains("position")) {
          throw Error(ErrorCode::kParse, "antenna " + antenna.serial + ": missing position");
        }
        antenna.position = parse_position(ja["position"], "antenna " + antenna.serial);
        node.antennas.push_back(std::move(antenna));
      }
    }
    if (!node.antennas.empty() && node.tier != CloudTier::kFarEdge) {
      throw Error(ErrorCode::kAntennaOnNonFarEdge, "antenna on non-FarEdge node " + node.id);
    }
    std::string id = node.id;
    if (!nodes.emplace(id, std::move(node)).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate node id " + id);
    }
  }
  std::vector<Link> links;
  if (doc.contains("links")) {
    if (!doc["links"].is_array()) throw Error(ErrorCode::kParse, "topology: \"links\" must be an array");
    for (const auto& jl : doc["links"]) {
      json_util::require_object(jl, "link");
      json_util::reject_unknown(jl, {"a", "b", "latencyMs", "bandwidthMbps"}, "link");
      Link link;
      link.endpointA = json_util::require_string(jl, "a", "link");
      link.endpointB = json_util::require_string(jl, "b", "link");
      link.latencyMs = json_util::require_number(jl, "latencyMs", "link");
      link.bandwidthMbps = json_util::require_number(jl, "bandwidthMbps", "link");
      links.push_back(std::move(link));
    }
  }
  return Topology(std::move(nodes), std::move(links));
}

Topology load_topology_file(const std::filesystem::path& path) {
  return load_topology(json_util::read_file(path));
}

nlohmann::json topology_to_json(const Topology& topology) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [id, node] : topology.nodes()) {
    nlohmann::json antennas = nlohmann::json::array();
    for (const auto& antenna : node.antennas) {
      antennas.push_back({{"serial", antenna.serial}, {"position", position_to_json(antenna.position)}});
    }
    nodes.push_back({{"id", id},
                     {"tier", to_string(node.tier)},
                     {"position", position_to_json(node.position)},
                     {"cpuMillicores", node.cpuCapacityMillicores},
                     {"ramMb", node.ramCapacityMb},
                     {"diskMb", node.diskCapacityMb},
                     {"antennas", std::move(antennas)}});
  }
  nlohmann::json links = nlohmann::json::array();
  for (const auto& link : topology.links()) {
    links.push_back({{"a", link.endpointA},
                     {"b", link.endpointB},
                     {"latencyMs", link.latencyMs},
                     {"bandwidthMbps", link.bandwidthMbps}});
  }
  return {{"nodes", std::move(nodes)}, {"links", std::move(links)}};
}

void reserve_resources(Node& node, const ResourceDemand& demand) {
  if (!demand.non_negative()) {
    throw Error(ErrorCode::kInvalidArgument, "negative demand on node " + node.id);
  }
  if (!demand.fits_within(node.free())) {
    std::ostringstream os;
    os << "insufficient capacity on node " << node.id << " (free cpu=" << node.free().cpuMillicores
       << "mc ram=" << node.free().ramMb << "MB disk=" << node.free().diskMb << "MB)";
    throw Error(ErrorCode::kInsufficientCapacity, os.str());
  }
  node.cpuUsedMillicores += demand.cpuMillicores;
  node.ramUsedMb += demand.ramMb;
  node.diskUsedMb += demand.diskMb;
}

void release_resources(Node& node, const ResourceDemand& demand) {
  if (!demand.non_negative()) {
    throw Error(ErrorCode::kInvalidArgument, "negative release on node " + node.id);
  }
  if (!demand.fits_within(node.used())) {
    throw Error(ErrorCode::kAccounting, "release exceeds used resources on node " + node.id);
  }
  node.cpuUsedMillicores -= demand.cpuMillicores;
  node.ramUsedMb -= demand.ramMb;
  node.diskUsedMb -= demand.diskMb;
}

Substrate::Substrate(Topology topology) : topology_(std::move(topology)) {}

Topology Substrate::snapshot() const {
  std::shared_lock lock(mutex_);
  return topology_;
}

PathMetrics Substrate::path_metrics(std::string_view a, std::string_view b) const {
  std::shared_lock lock(mutex_);
  return topology_.path_metrics(a, b);
}

namespace {

Antenna* find_antenna(Topology& topology, const std::string& serial) {
  const auto host = topology.antenna_host(serial);
  if (!host) return nullptr;
  for (auto& antenna : topology.mutable_node(*host).antennas) {
    if (antenna.serial == serial) return &antenna;
  }
  return nullptr;
}

}  // namespace

void Substrate::claim(const Claim& claim) {
  std::unique_lock lock(mutex_);
  Antenna* antenna = nullptr;
  if (claim.antennaSerial) {
    antenna = find_antenna(topology_, *claim.antennaSerial);
    if (antenna == nullptr) {
      throw Error(ErrorCode::kAntennaUnavailable, "unknown antenna " + *claim.antennaSerial);
    }
    if (antenna->occupiedBy) {
      throw Error(ErrorCode::kAntennaUnavailable,
                  "antenna " + antenna->serial + " occupied by " + *antenna->occupiedBy);
    }
  }
  std::size_t done = 0;
  try {
    for (; done < claim.reservations.size(); ++done) {
      const auto& [nodeId, demand] = claim.reservations[done];
      reserve_resources(topology_.mutable_node(nodeId), demand);
    }
  } catch (...) {
    // Compensate in reverse order.
    while (done > 0) {
      --done;
      const auto& [nodeId, demand] = claim.reservations[done];
      release_resources(topology_.mutable_node(nodeId), demand);
    }
    throw;
  }
  if (antenna != nullptr) antenna->occupiedBy = claim.deploymentId;
}

void Substrate::release(const Claim& claim) {
  std::unique_lock lock(mutex_);
  Antenna* antenna = nullptr;
  if (claim.antennaSerial) {
    antenna = find_antenna(topology_, *claim.antennaSerial);
    if (antenna == nullptr || antenna->occupiedBy != claim.deploymentId) {
      throw Error(ErrorCode::kAccounting,
                  "antenna " + *claim.antennaSerial + " not held by " + claim.deploymentId);
    }
  }
  // Validate the whole release before mutating so a bad claim leaves no trace.
  std::map<std::string, ResourceDemand> totals;
  for (const auto& [nodeId, demand] : claim.reservations) {
    topology_.node(nodeId);
    totals[nodeId] += demand;
  }
  for (const auto& [nodeId, total] : totals) {
    if (!total.fits_within(topology_.node(nodeId).used())) {
      throw Error(ErrorCode::kAccounting, "release exceeds used resources on node " + nodeId);
    }
  }
  for (auto it = claim.reservations.rbegin(); it != claim.reservations.rend(); ++it) {
    release_resources(topology_.mutable_node(it->first), it->second);
  }
  if (antenna != nullptr) antenna->occupiedBy.reset();
}

}  // namespace ztc
