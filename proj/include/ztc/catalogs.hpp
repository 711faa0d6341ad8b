// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztc/clock.hpp"
#include "ztc/lifecycle.hpp"
#include "ztc/order.hpp"
#include "ztc/substrate.hpp"

namespace ztc {

// ---------------------------------------------------------------------------
// Resource Catalog
// ---------------------------------------------------------------------------

struct ResourceCatalogEntry {
  std::string nodeId;
  CloudTier tier = CloudTier::kRegional;
  GeoPosition position;
  std::int64_t freeCpuMillicores = 0;
  std::int64_t freeRamMb = 0;
  std::int64_t freeDiskMb = 0;
  std::vector<std::string> antennaSerialsAvailable;
  TimestampUs lastRefreshed = 0;

  ResourceDemand free() const { return {freeCpuMillicores, freeRamMb, freeDiskMb}; }
  bool operator==(const ResourceCatalogEntry&) const = default;
};

// One entry per node, in node-id order. Free values are capacity minus used;
// occupied antennas are left out.
std::vector<ResourceCatalogEntry> build_resource_catalog(const Topology& topology, TimestampUs now);

// `include_timestamps = false` yields the infrastructure content only, which
// is what conservation checks compare.
nlohmann::json resource_catalog_to_json(const std::vector<ResourceCatalogEntry>& entries,
                                        bool include_timestamps = true);
std::vector<ResourceCatalogEntry> resource_catalog_from_json(const nlohmann::json& j);

class ResourceCatalog {
 public:
  ResourceCatalog() = default;
  explicit ResourceCatalog(std::optional<std::filesystem::path> snapshot_path)
      : snapshot_path_(std::move(snapshot_path)) {}

  // Recomputes from the given substrate snapshot and publishes the result as
  // one unit. Returns the published entries.
  std::vector<ResourceCatalogEntry> refresh(const Topology& topology, TimestampUs now);

  std::vector<ResourceCatalogEntry> entries() const;
  std::optional<ResourceCatalogEntry> find(const std::string& nodeId) const;
  std::uint64_t refresh_count() const;

  static std::vector<ResourceCatalogEntry> load(const std::filesystem::path& path);

 private:
  mutable std::shared_mutex mutex_;
  std::vector<ResourceCatalogEntry> entries_;
  std::uint64_t refreshes_ = 0;
  std::optional<std::filesystem::path> snapshot_path_;
};

// ---------------------------------------------------------------------------
// Deployment Catalog
// ---------------------------------------------------------------------------

struct UnitRecord {
  std::string unitId;  // "<deploymentId>/<cu|du|ru>"
  UnitKind unitKind = UnitKind::kCu;
  std::string nodeId;
  std::optional<std::string> ipAddress;
  std::optional<std::string> antennaSerial;
  std::map<std::string, std::string> configDocument;
  UnitState state = UnitState::kCreated;

  bool operator==(const UnitRecord&) const = default;
};

struct UnitSet {
  UnitRecord cu;
  UnitRecord du;
  UnitRecord ru;

  UnitRecord& of(UnitKind kind);
  const UnitRecord& of(UnitKind kind) const;
  bool operator==(const UnitSet&) const = default;
};

struct EventLogEntry {
  TimestampUs timestampUs = 0;
  std::string step;
  std::string detail;

  bool operator==(const EventLogEntry&) const = default;
};

struct LifecycleTransition {
  TimestampUs timestampUs = 0;
  LifecycleState state = LifecycleState::kPending;

  bool operator==(const LifecycleTransition&) const = default;
};

struct DeploymentRecord {
  std::string deploymentId;
  std::string tag;
  ServiceOrder order;
  std::optional<UnitSet> units;
  std::optional<ChainCandidate> chain;
  LifecycleState lifecycle = LifecycleState::kPending;
  std::vector<EventLogEntry> eventLog;
  std::vector<LifecycleTransition> lifecycleHistory;
  KpiTimeline timeline;
  TimestampUs createdAtUs = 0;
  std::optional<std::string> abortCause;

  bool operator==(const DeploymentRecord&) const = default;
};

// Throws Error(kInvalidArgument) naming the first violated record invariant.
void check_record_invariants(const DeploymentRecord& record);

nlohmann::json unit_to_json(const UnitRecord& unit);
UnitRecord unit_from_json(const nlohmann::json& j);
nlohmann::json deployment_to_json(const DeploymentRecord& record);
DeploymentRecord deployment_from_json(const nlohmann::json& j);

struct DeploymentFilter {
  std::optional<std::string> tag;
  std::optional<LifecycleState> state;
};

// Runtime state of recorded deployments. Readers run concurrently; writes are
// serialized and published atomically (snapshot file included).
class DeploymentCatalog {
 public:
  DeploymentCatalog() = default;
  explicit DeploymentCatalog(std::optional<std::filesystem::path> snapshot_path)
      : snapshot_path_(std::move(snapshot_path)) {}

  // "d-" + zero-padded counter; never repeats within this catalog's lifetime.
  std::string allocate_id();

  // Inserts a new record or overwrites one whose lifecycle advances.
  void put(const DeploymentRecord& record);
  std::optional<DeploymentRecord> get(const std::string& id) const;
  // Ordered by creation time, then id.
  std::vector<DeploymentRecord> list(const DeploymentFilter& filter = {}) const;
  // Only Running or terminal records can be removed.
  DeploymentRecord remove(const std::string& id);
  std::size_t size() const;

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
  // Replaces the in-memory state with a previously saved snapshot.
  void restore(const std::filesystem::path& path);

  bool operator==(const DeploymentCatalog& o) const;

 private:
  void persist_locked() const;
  nlohmann::json to_json_locked() const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, DeploymentRecord> records_;
  std::uint64_t next_id_ = 1;
  std::optional<std::filesystem::path> snapshot_path_;
};

}  // namespace ztc
