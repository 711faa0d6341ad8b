// SPDX-License-Identifier: Apache-2.0

#include "ztc/deployment_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {

const std::vector<std::string>& pipeline_steps() {
  static const std::vector<std::string> kSteps = {
      steps::kRefresh, steps::kDiscover, steps::kEnumerate, steps::kValidate,  steps::kScore, steps::kSelect,
      steps::kRender,  steps::kCreate,   steps::kRecord,    steps::kAffiliate, steps::kStart};
  return kSteps;
}

nlohmann::json event_to_json(const PipelineEvent& e) {
  return {{"sequence", e.sequence},
          {"deploymentId", e.deploymentId},
          {"timestampUs", e.timestampUs},
          {"step", e.step},
          {"detail", e.detail}};
}

Claim claim_for(const std::string& deploymentId, const ChainCandidate& chain, const ServiceOrder& order) {
  Claim claim;
  claim.deploymentId = deploymentId;
  for (auto kind : kAllUnitKinds) {
    claim.reservations.emplace_back(chain.node_for(kind), order.constraints.perUnitDemand.of(kind));
  }
  claim.antennaSerial = chain.antennaSerial;
  return claim;
}

UnitSet create_units(const std::string& deploymentId, const std::vector<Manifest>& manifests,
                     Substrate& substrate, IpPool& pool, AgentBus& bus, Clock& clock,
                     std::chrono::microseconds unitStartDelay) {
  if (manifests.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected exactly three manifests");
  }
  Claim claim;
  claim.deploymentId = deploymentId;
  for (const auto& m : manifests) {
    claim.reservations.emplace_back(m.targetNodeId, m.resourceRequest);
    if (m.unitKind == UnitKind::kRu) claim.antennaSerial = m.parameters.at("antennaSerial");
  }
  substrate.claim(claim);

  UnitSet units;
  std::vector<std::string> leased;
  std::vector<std::string> spawned;
  try {
    for (const auto& m : manifests) {
      auto& unit = units.of(m.unitKind);
      unit.unitId = unit_id_for(deploymentId, m.unitKind);
      unit.unitKind = m.unitKind;
      unit.nodeId = m.targetNodeId;
      if (m.unitKind == UnitKind::kRu) unit.antennaSerial = m.parameters.at("antennaSerial");
      unit.state = UnitState::kCreated;
      unit.ipAddress = pool.allocate(unit.unitId).ipAddress;
      leased.push_back(*unit.ipAddress);
    }
    for (const auto& m : manifests) {
      clock.sleep_for(unitStartDelay);
      const auto& unit = units.of(m.unitKind);
      bus.spawn(unit);
      spawned.push_back(unit.unitId);
    }
  } catch (...) {
    for (auto it = spawned.rbegin(); it != spawned.rend(); ++it) bus.remove(*it);
    for (auto it = leased.rbegin(); it != leased.rend(); ++it) pool.release(*it);
    substrate.release(claim);
    throw;
  }
  return units;
}

nlohmann::json teardown_to_json(const TeardownSummary& s) {
  nlohmann::json reservations = nlohmann::json::array();
  for (const auto& [node, d] : s.releasedReservations) {
    reservations.push_back(
        {{"nodeId", node}, {"cpuMillicores", d.cpuMillicores}, {"ramMb", d.ramMb}, {"diskMb", d.diskMb}});
  }
  return {{"deploymentId", s.deploymentId},
          {"releasedIps", s.releasedIps},
          {"releasedAntenna", s.releasedAntenna ? nlohmann::json(*s.releasedAntenna) : nlohmann::json(nullptr)},
          {"releasedReservations", std::move(reservations)}};
}

// ---------------------------------------------------------------------------

namespace {

std::optional<std::filesystem::path> under(const std::optional<std::filesystem::path>& dir, const char* leaf) {
  if (!dir) return std::nullopt;
  return *dir / leaf;
}

}  // namespace

DeploymentEngine::DeploymentEngine(Topology topology, Clock& clock, EngineOptions options)
    : clock_(clock),
      options_(std::move(options)),
      substrate_(std::move(topology)),
      resource_catalog_(under(options_.dataDir, "resource_catalog.json")),
      deployment_catalog_(under(options_.dataDir, "deployment_catalog.json")),
      pool_(options_.ipPoolFirst, options_.ipPoolLast),
      bus_(clock, under(options_.dataDir, "traces"), options_.faults) {
  ztc_timeline_.tZtcDeployStart = clock_.now_us();
  if (options_.dataDir) std::filesystem::create_directories(*options_.dataDir);
  refresh_resource_catalog();
  ztc_timeline_.tZtcRunning = clock_.now_us();
}

DeploymentEngine::~DeploymentEngine() { wait_idle(); }

std::vector<ResourceCatalogEntry> DeploymentEngine::refresh_resource_catalog() {
  return resource_catalog_.refresh(substrate_.snapshot(), clock_.now_us());
}

DeploymentRecord DeploymentEngine::register_order(const ServiceOrder& order) {
  validate_order(order);
  DeploymentRecord r;
  r.deploymentId = deployment_catalog_.allocate_id();
  r.tag = order.tag;
  r.order = order;
  r.lifecycle = LifecycleState::kPending;
  r.createdAtUs = clock_.now_us();
  r.lifecycleHistory.push_back({r.createdAtUs, LifecycleState::kPending});
  r.timeline = ztc_timeline_;
  r.timeline.tRanDeployStart = r.createdAtUs;
  publish(r, false);
  return r;
}

std::string DeploymentEngine::submit(const ServiceOrder& order) {
  DeploymentRecord record = register_order(order);
  const std::string id = record.deploymentId;
  {
    std::lock_guard lock(flight_mutex_);
    ++in_flight_;
  }
  std::thread([this, record = std::move(record)]() mutable {
    execute(record);
    std::lock_guard lock(flight_mutex_);
    --in_flight_;
    flight_cv_.notify_all();
  }).detach();
  return id;
}

DeploymentRecord DeploymentEngine::run_pipeline(const ServiceOrder& order) {
  DeploymentRecord record = register_order(order);
  execute(record);
  return record;
}

void DeploymentEngine::wait_idle() {
  std::unique_lock lock(flight_mutex_);
  flight_cv_.wait(lock, [this] { return in_flight_ == 0; });
}

void DeploymentEngine::execute(DeploymentRecord& record) {
  bool recorded = false;
  bool manifests_written = false;
  std::optional<Claim> claim;
  try {
    run_steps(record, recorded, claim, manifests_written);
  } catch (const Error& e) {
    abort(record, e.what(), recorded, claim, manifests_written);
  }
}

void DeploymentEngine::run_steps(DeploymentRecord& record, bool& recorded, std::optional<Claim>& claim,
                                 bool& manifests_written) {
  const ServiceOrder& order = record.order;

  // Placement and the claim are one admission decision. Concurrent pipelines
  // queue here so each sees the reservations of those admitted before it.
  std::unique_lock admission(admission_mutex_);
  transition(record, LifecycleState::kDiscovering);
  const Topology snapshot = substrate_.snapshot();
  const auto catalog = resource_catalog_.refresh(snapshot, clock_.now_us());
  log_step(record, steps::kRefresh, std::to_string(catalog.size()) + " nodes");

  const auto candidates = discover(order, catalog, snapshot, options_.policy);
  {
    std::ostringstream os;
    os << candidates.cuNodes.size() << " cu, " << candidates.duNodes.size() << " du, "
       << candidates.ruNodes.size() << " ru";
    log_step(record, steps::kDiscover, os.str());
  }
  const auto chains = enumerate_chains(candidates);
  log_step(record, steps::kEnumerate, std::to_string(chains.size()) + " chains");

  transition(record, LifecycleState::kValidating);
  std::vector<std::pair<ChainCandidate, ProbeReport>> passing;
  for (const auto& chain : chains) {
    auto probe = validate_chain(chain, order, snapshot);
    if (probe.pass) passing.emplace_back(chain, std::move(probe));
  }
  log_step(record, steps::kValidate, std::to_string(passing.size()) + "/" + std::to_string(chains.size()) + " pass");

  std::vector<ChainCandidate> scored;
  for (const auto& [chain, probe] : passing) {
    ChainCandidate c = chain;
    c.score = score_chain(chain, probe, order);
    scored.push_back(std::move(c));
  }
  log_step(record, steps::kScore, std::to_string(scored.size()) + " scored");

  const Selection selection = select_best(scored);
  if (const auto* infeasible = std::get_if<Infeasible>(&selection)) {
    throw Error(ErrorCode::kInvalidState, infeasible->reason);
  }
  record.chain = std::get<ChainCandidate>(selection);
  log_step(record, steps::kSelect,
           record.chain->cuNodeId + "/" + record.chain->duNodeId + "/" + record.chain->ruNodeId + "/" +
               record.chain->antennaSerial);

  transition(record, LifecycleState::kRendering);
  const auto manifests = render_manifests(*record.chain, order);
  if (options_.dataDir) {
    manifests_written = true;
    write_manifests(*options_.dataDir / "manifests", record.deploymentId, manifests);
  }
  log_step(record, steps::kRender, "3 manifests");

  transition(record, LifecycleState::kDeploying);
  record.units = create_units(record.deploymentId, manifests, substrate_, pool_, bus_, clock_,
                              options_.unitStartDelay);
  claim = claim_for(record.deploymentId, *record.chain, order);
  admission.unlock();

  transition(record, LifecycleState::kConfiguring);
  for (auto kind : kAllUnitKinds) {
    const auto& unit = record.units->of(kind);
    UnitConfig config = {{"unitKind", std::string(to_string(kind))},
                         {"nodeId", unit.nodeId},
                         {"ipAddress", *unit.ipAddress},
                         {"tag", order.tag},
                         {"maxUsers", std::to_string(order.maxUsers)},
                         {"spectrumBand", order.spectrumBand}};
    if (kind == UnitKind::kRu) config[kSdrAddrsKey] = sdr_addrs_for(*unit.antennaSerial);
    push_config(bus_, unit.unitId, config);
    record.units->of(kind) = bus_.agent(unit.unitId)->snapshot();
  }
  log_step(record, steps::kCreate,
           *record.units->cu.ipAddress + "," + *record.units->du.ipAddress + "," + *record.units->ru.ipAddress);
  refresh_resource_catalog();

  log_step(record, steps::kRecord);
  publish(record, true);
  recorded = true;

  transition(record, LifecycleState::kAffiliating);
  affiliate(bus_, record);
  log_step(record, steps::kAffiliate);

  start_units(bus_, record, clock_);
  log_step(record, steps::kStart, {}, record.timeline.tRanRunning);
  publish(record, true);
}

void DeploymentEngine::abort(DeploymentRecord& record, const std::string& cause, bool recorded,
                             const std::optional<Claim>& claim, bool manifests_written) {
  if (claim) {
    release_units(record);
    substrate_.release(*claim);
    refresh_resource_catalog();
  }
  if (manifests_written) remove_manifests(record.deploymentId);
  record.abortCause = cause;
  log_step(record, steps::kAbort, cause);
  if (recorded) {
    record.lifecycle = LifecycleState::kAborted;
    record.lifecycleHistory.push_back({clock_.now_us(), LifecycleState::kAborted});
    publish(record, true);
    deployment_catalog_.remove(record.deploymentId);
    publish(record, false);
  } else {
    transition(record, LifecycleState::kAborted);
  }
}

void DeploymentEngine::release_units(const DeploymentRecord& record) {
  if (!record.units) return;
  for (auto kind : {UnitKind::kRu, UnitKind::kDu, UnitKind::kCu}) {
    const auto& unit = record.units->of(kind);
    bus_.remove(unit.unitId);
    if (unit.ipAddress && pool_.holder_of(*unit.ipAddress) == unit.unitId) pool_.release(*unit.ipAddress);
  }
}

void DeploymentEngine::remove_manifests(const std::string& deploymentId) {
  if (!options_.dataDir) return;
  std::error_code ec;
  std::filesystem::remove_all(*options_.dataDir / "manifests" / deploymentId, ec);
}

TeardownSummary DeploymentEngine::teardown(const std::string& deploymentId) {
  auto current = deployment_catalog_.get(deploymentId);
  if (!current) {
    if (deployment(deploymentId)) {
      throw Error(ErrorCode::kInvalidState, deploymentId + ": not a recorded deployment");
    }
    throw Error(ErrorCode::kUnknownDeployment, "unknown deployment " + deploymentId);
  }
  DeploymentRecord record = *current;
  if (record.lifecycle != LifecycleState::kRunning) {
    throw Error(ErrorCode::kInvalidState,
                deploymentId + ": teardown requires Running, found " + std::string(to_string(record.lifecycle)));
  }
  // The catalog rejects a second Running -> Deleting, which serializes
  // concurrent teardowns of the same deployment.
  transition(record, LifecycleState::kDeleting);
  publish(record, true);

  TeardownSummary summary;
  summary.deploymentId = deploymentId;
  const Claim claim = claim_for(deploymentId, *record.chain, record.order);
  for (auto kind : {UnitKind::kRu, UnitKind::kDu, UnitKind::kCu}) {
    auto& unit = record.units->of(kind);
    bus_.remove(unit.unitId);
    unit.state = UnitState::kStopped;
    if (unit.ipAddress) {
      pool_.release(*unit.ipAddress);
      summary.releasedIps.push_back(*unit.ipAddress);
    }
  }
  substrate_.release(claim);
  summary.releasedAntenna = claim.antennaSerial;
  summary.releasedReservations = claim.reservations;
  remove_manifests(deploymentId);
  refresh_resource_catalog();

  log_step(record, steps::kTeardown);
  transition(record, LifecycleState::kDeleted);
  publish(record, true);
  return summary;
}

DeploymentRecord DeploymentEngine::delete_deployment(const std::string& deploymentId) {
  auto current = deployment_catalog_.get(deploymentId);
  if (!current) {
    std::lock_guard lock(state_mutex_);
    auto it = known_.find(deploymentId);
    if (it == known_.end()) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment " + deploymentId);
    if (it->second.lifecycle != LifecycleState::kAborted) {
      throw Error(ErrorCode::kInvalidState, deploymentId + ": cannot delete while " +
                                                std::string(to_string(it->second.lifecycle)));
    }
    DeploymentRecord removed = std::move(it->second);
    known_.erase(it);
    return removed;
  }
  if (current->lifecycle == LifecycleState::kRunning) teardown(deploymentId);
  DeploymentRecord removed = deployment_catalog_.remove(deploymentId);
  std::lock_guard lock(state_mutex_);
  known_.erase(deploymentId);
  return removed;
}

std::optional<DeploymentRecord> DeploymentEngine::deployment(const std::string& deploymentId) const {
  std::lock_guard lock(state_mutex_);
  auto it = known_.find(deploymentId);
  if (it == known_.end()) return std::nullopt;
  return it->second;
}

std::vector<DeploymentRecord> DeploymentEngine::deployments(const DeploymentFilter& filter) const {
  std::vector<DeploymentRecord> out;
  {
    std::lock_guard lock(state_mutex_);
    for (const auto& [id, r] : known_) {
      if (filter.tag && r.tag != *filter.tag) continue;
      if (filter.state && r.lifecycle != *filter.state) continue;
      out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const DeploymentRecord& a, const DeploymentRecord& b) {
    return std::make_tuple(a.createdAtUs, a.deploymentId.size(), std::cref(a.deploymentId)) <
           std::make_tuple(b.createdAtUs, b.deploymentId.size(), std::cref(b.deploymentId));
  });
  return out;
}

std::vector<PipelineEvent> DeploymentEngine::events_since(std::uint64_t sequence) const {
  std::lock_guard lock(state_mutex_);
  std::vector<PipelineEvent> out;
  for (const auto& e : events_) {
    if (e.sequence > sequence) out.push_back(e);
  }
  return out;
}

void DeploymentEngine::log_step(DeploymentRecord& record, const std::string& step, const std::string& detail,
                                std::optional<TimestampUs> at) {
  TimestampUs ts = at ? *at : clock_.now_us();
  if (!record.eventLog.empty()) ts = std::max(ts, record.eventLog.back().timestampUs);
  record.eventLog.push_back({ts, step, detail});
  std::lock_guard lock(state_mutex_);
  events_.push_back({events_.size() + 1, record.deploymentId, ts, step, detail});
  known_[record.deploymentId] = record;
}

void DeploymentEngine::transition(DeploymentRecord& record, LifecycleState next) {
  if (!is_allowed_transition(record.lifecycle, next)) {
    throw std::logic_error(record.deploymentId + ": illegal lifecycle transition " +
                           std::string(to_string(record.lifecycle)) + " -> " + std::string(to_string(next)));
  }
  record.lifecycle = next;
  record.lifecycleHistory.push_back({clock_.now_us(), next});
  std::lock_guard lock(state_mutex_);
  known_[record.deploymentId] = record;
}

void DeploymentEngine::publish(const DeploymentRecord& record, bool to_catalog) {
  if (to_catalog) deployment_catalog_.put(record);
  std::lock_guard lock(state_mutex_);
  known_[record.deploymentId] = record;
}

std::string DeploymentEngine::state_digest() const {
  nlohmann::json state;
  const auto topo = substrate_.snapshot();
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [id, n] : topo.nodes()) {
    nlohmann::json antennas = nlohmann::json::array();
    for (const auto& a : n.antennas) {
      antennas.push_back({a.serial, a.occupiedBy ? nlohmann::json(*a.occupiedBy) : nlohmann::json(nullptr)});
    }
    nodes.push_back({id, n.cpuUsedMillicores, n.ramUsedMb, n.diskUsedMb, std::move(antennas)});
  }
  state["substrate"] = std::move(nodes);
  state["resourceCatalog"] = resource_catalog_to_json(resource_catalog_.entries());
  state["deploymentCatalog"] = deployment_catalog_.to_json();
  nlohmann::json leases = nlohmann::json::array();
  for (const auto& l : pool_.leases()) leases.push_back({l.ipAddress, l.leasedTo});
  state["leases"] = std::move(leases);
  {
    std::lock_guard lock(state_mutex_);
    nlohmann::json known = nlohmann::json::array();
    for (const auto& [id, r] : known_) known.push_back(deployment_to_json(r));
    state["known"] = std::move(known);
    state["events"] = events_.size();
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : state.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ztc
