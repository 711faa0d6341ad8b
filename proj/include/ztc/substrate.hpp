// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ztc/geo.hpp"

namespace ztc {

enum class CloudTier { kRegional, kEdge, kFarEdge };

std::string_view to_string(CloudTier tier);
CloudTier parse_tier(std::string_view text);

struct ResourceDemand {
  std::int64_t cpuMillicores = 0;
  std::int64_t ramMb = 0;
  std::int64_t diskMb = 0;

  bool operator==(const ResourceDemand&) const = default;
  ResourceDemand& operator+=(const ResourceDemand& o) {
    cpuMillicores += o.cpuMillicores;
    ramMb += o.ramMb;
    diskMb += o.diskMb;
    return *this;
  }
  // Component-wise <=.
  bool fits_within(const ResourceDemand& o) const {
    return cpuMillicores <= o.cpuMillicores && ramMb <= o.ramMb && diskMb <= o.diskMb;
  }
  bool non_negative() const { return cpuMillicores >= 0 && ramMb >= 0 && diskMb >= 0; }
};

struct Antenna {
  std::string serial;
  GeoPosition position;
  std::optional<std::string> occupiedBy;

  bool operator==(const Antenna&) const = default;
};

struct Node {
  std::string id;
  CloudTier tier = CloudTier::kRegional;
  GeoPosition position;
  std::int64_t cpuCapacityMillicores = 0;
  std::int64_t ramCapacityMb = 0;
  std::int64_t diskCapacityMb = 0;
  std::int64_t cpuUsedMillicores = 0;
  std::int64_t ramUsedMb = 0;
  std::int64_t diskUsedMb = 0;
  std::vector<Antenna> antennas;

  ResourceDemand capacity() const { return {cpuCapacityMillicores, ramCapacityMb, diskCapacityMb}; }
  ResourceDemand used() const { return {cpuUsedMillicores, ramUsedMb, diskUsedMb}; }
  ResourceDemand free() const {
    return {cpuCapacityMillicores - cpuUsedMillicores, ramCapacityMb - ramUsedMb,
            diskCapacityMb - diskUsedMb};
  }

  bool operator==(const Node&) const = default;
};

struct Link {
  std::string endpointA;
  std::string endpointB;
  double latencyMs = 0.0;
  double bandwidthMbps = 0.0;

  bool operator==(const Link&) const = default;
};

// Result of a simulated probe between two nodes. Disconnected pairs carry an
// infinite latency and zero bandwidth; a node paired with itself has zero
// latency and unbounded bandwidth.
struct PathMetrics {
  double latencyMs = 0.0;
  double bandwidthMbps = 0.0;

  bool reachable() const { return latencyMs != std::numeric_limits<double>::infinity(); }
  bool operator==(const PathMetrics&) const = default;

  static PathMetrics unreachable() {
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  static PathMetrics self() { return {0.0, std::numeric_limits<double>::infinity()}; }
};

class Topology {
 public:
  Topology() = default;
  Topology(std::map<std::string, Node> nodes, std::vector<Link> links);

  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  bool contains(std::string_view id) const;
  const Node& node(std::string_view id) const;
  Node& mutable_node(std::string_view id);

  // Minimum-latency path between a and b. Link latencies are summed in integer
  // nanoseconds so the result is exactly symmetric. Among equal-latency paths
  // the widest bottleneck is reported.
  PathMetrics path_metrics(std::string_view a, std::string_view b) const;

  // Node id hosting the antenna, if any.
  std::optional<std::string> antenna_host(std::string_view serial) const;

  bool operator==(const Topology& o) const { return nodes_ == o.nodes_ && links_ == o.links_; }

 private:
  struct Edge {
    std::string to;
    std::int64_t latencyNs;
    double bandwidthMbps;
  };

  void validate_and_index();

  std::map<std::string, Node> nodes_;
  std::vector<Link> links_;
  std::map<std::string, std::vector<Edge>, std::less<>> adjacency_;
};

// Parses and validates a topology document. Unknown fields are rejected.
Topology load_topology(std::string_view document);
Topology load_topology_file(const std::filesystem::path& path);
nlohmann::json topology_to_json(const Topology& topology);

std::int64_t latency_ms_to_ns(double latencyMs);

// Atomic check-and-reserve. Throws and leaves the node untouched when any
// dimension would exceed capacity.
void reserve_resources(Node& node, const ResourceDemand& demand);
// Throws when the release exceeds what is currently used.
void release_resources(Node& node, const ResourceDemand& demand);

// Everything one deployment holds on the substrate.
struct Claim {
  std::string deploymentId;
  std::vector<std::pair<std::string, ResourceDemand>> reservations;
  std::optional<std::string> antennaSerial;

  bool operator==(const Claim&) const = default;
};

// Shared owner of the live substrate. Structure is immutable after
// construction; capacity counters and antenna occupancy follow a
// single-writer / multi-reader contract.
class Substrate {
 public:
  explicit Substrate(Topology topology);

  Topology snapshot() const;
  PathMetrics path_metrics(std::string_view a, std::string_view b) const;

  // All-or-nothing: either every reservation and the antenna are taken, or
  // the substrate is left unchanged and an Error is thrown.
  void claim(const Claim& claim);
  void release(const Claim& claim);

 private:
  mutable std::shared_mutex mutex_;
  Topology topology_;
};

}  // namespace ztc
