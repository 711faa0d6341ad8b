// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ztc/agents.hpp"
#include "ztc/catalogs.hpp"
#include "ztc/clock.hpp"
#include "ztc/ip_pool.hpp"
#include "ztc/manifest.hpp"
#include "ztc/placement.hpp"
#include "ztc/substrate.hpp"

namespace ztc {

// Event-log step labels, in pipeline order.
namespace steps {
inline constexpr const char* kRefresh = "refresh";
inline constexpr const char* kDiscover = "discover";
inline constexpr const char* kEnumerate = "enumerate";
inline constexpr const char* kValidate = "validate";
inline constexpr const char* kScore = "score";
inline constexpr const char* kSelect = "select";
inline constexpr const char* kRender = "render";
inline constexpr const char* kCreate = "create";
inline constexpr const char* kRecord = "record";
inline constexpr const char* kAffiliate = "affiliate";
inline constexpr const char* kStart = "start";
inline constexpr const char* kAbort = "abort";
inline constexpr const char* kTeardown = "teardown";
}  // namespace steps

const std::vector<std::string>& pipeline_steps();

struct PipelineEvent {
  std::uint64_t sequence = 0;
  std::string deploymentId;
  TimestampUs timestampUs = 0;
  std::string step;
  std::string detail;

  bool operator==(const PipelineEvent&) const = default;
};

nlohmann::json event_to_json(const PipelineEvent& event);

struct EngineOptions {
  PlacementPolicy policy;
  // Simulated container start time, charged once per unit.
  std::chrono::microseconds unitStartDelay{0};
  // Enables snapshots, manifests and traces under this directory.
  std::optional<std::filesystem::path> dataDir;
  DeliveryFaults faults;
  std::string ipPoolFirst{IpPool::kDefaultFirst};
  std::string ipPoolLast{IpPool::kDefaultLast};
};

// Substrate claim implied by a placed deployment.
Claim claim_for(const std::string& deploymentId, const ChainCandidate& chain, const ServiceOrder& order);

// Reserves capacity and the antenna atomically, leases one IP per unit and
// spawns each unit's agent. On any failure everything taken so far is given
// back in reverse order and the error is rethrown.
UnitSet create_units(const std::string& deploymentId, const std::vector<Manifest>& manifests,
                     Substrate& substrate, IpPool& pool, AgentBus& bus, Clock& clock,
                     std::chrono::microseconds unitStartDelay = std::chrono::microseconds{0});

struct TeardownSummary {
  std::string deploymentId;
  std::vector<std::string> releasedIps;
  std::optional<std::string> releasedAntenna;
  std::vector<std::pair<std::string, ResourceDemand>> releasedReservations;
};

nlohmann::json teardown_to_json(const TeardownSummary& summary);

// Runs the commissioning pipeline and owns the shared infrastructure
// state (substrate, catalogs, IP pool, agents).
class DeploymentEngine {
 public:
  DeploymentEngine(Topology topology, Clock& clock, EngineOptions options = {});
  ~DeploymentEngine();

  DeploymentEngine(const DeploymentEngine&) = delete;
  DeploymentEngine& operator=(const DeploymentEngine&) = delete;

  // Registers a Pending deployment and runs its pipeline on a worker thread.
  std::string submit(const ServiceOrder& order);
  // Registers and runs to completion; returns the terminal record.
  DeploymentRecord run_pipeline(const ServiceOrder& order);
  // Blocks until no pipeline is in flight.
  void wait_idle();

  TeardownSummary teardown(const std::string& deploymentId);
  // Tears down if Running, then forgets the deployment.
  DeploymentRecord delete_deployment(const std::string& deploymentId);

  std::optional<DeploymentRecord> deployment(const std::string& deploymentId) const;
  // Every known deployment (in flight, recorded, aborted), by creation time.
  std::vector<DeploymentRecord> deployments(const DeploymentFilter& filter = {}) const;
  std::vector<PipelineEvent> events_since(std::uint64_t sequence) const;

  std::vector<ResourceCatalogEntry> refresh_resource_catalog();
  std::vector<ResourceCatalogEntry> resource_catalog() const { return resource_catalog_.entries(); }
  Topology substrate_snapshot() const { return substrate_.snapshot(); }

  const DeploymentCatalog& deployment_catalog() const { return deployment_catalog_; }
  const IpPool& ip_pool() const { return pool_; }
  AgentBus& bus() { return bus_; }
  const AgentBus& bus() const { return bus_; }
  const Clock& clock() const { return clock_; }
  const EngineOptions& options() const { return options_; }
  KpiTimeline ztc_timeline() const { return ztc_timeline_; }

  // Hash over all mutable infrastructure and catalog state.
  std::string state_digest() const;

 private:
  DeploymentRecord register_order(const ServiceOrder& order);
  void execute(DeploymentRecord& record);
  void run_steps(DeploymentRecord& record, bool& recorded, std::optional<Claim>& claim, bool& manifests_written);
  void abort(DeploymentRecord& record, const std::string& cause, bool recorded,
             const std::optional<Claim>& claim, bool manifests_written);

  void log_step(DeploymentRecord& record, const std::string& step, const std::string& detail = {},
                std::optional<TimestampUs> at = std::nullopt);
  void transition(DeploymentRecord& record, LifecycleState next);
  void publish(const DeploymentRecord& record, bool to_catalog);
  void release_units(const DeploymentRecord& record);
  void remove_manifests(const std::string& deploymentId);

  Clock& clock_;
  EngineOptions options_;
  KpiTimeline ztc_timeline_;
  Substrate substrate_;
  ResourceCatalog resource_catalog_;
  DeploymentCatalog deployment_catalog_;
  IpPool pool_;
  AgentBus bus_;

  std::mutex admission_mutex_;
  mutable std::mutex state_mutex_;
  std::map<std::string, DeploymentRecord> known_;
  std::vector<PipelineEvent> events_;

  std::mutex flight_mutex_;
  std::condition_variable flight_cv_;
  std::size_t in_flight_ = 0;
};

}  // namespace ztc
