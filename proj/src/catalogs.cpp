// SPDX-License-Identifier: Apache-2.0

#include "ztc/catalogs.hpp"

#include <algorithm>
#include <cstdio>
#include <mutex>
#include <tuple>

#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {

std::vector<ResourceCatalogEntry> build_resource_catalog(const Topology& topology, TimestampUs now) {
  std::vector<ResourceCatalogEntry> entries;
  entries.reserve(topology.nodes().size());
  for (const auto& [id, node] : topology.nodes()) {
    ResourceCatalogEntry e;
    e.nodeId = id;
    e.tier = node.tier;
    e.position = node.position;
    const auto free = node.free();
    e.freeCpuMillicores = free.cpuMillicores;
    e.freeRamMb = free.ramMb;
    e.freeDiskMb = free.diskMb;
    for (const auto& antenna : node.antennas) {
      if (!antenna.occupiedBy) e.antennaSerialsAvailable.push_back(antenna.serial);
    }
    e.lastRefreshed = now;
    entries.push_back(std::move(e));
  }
  return entries;
}

nlohmann::json resource_catalog_to_json(const std::vector<ResourceCatalogEntry>& entries,
                                        bool include_timestamps) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j = {{"nodeId", e.nodeId},
                        {"tier", to_string(e.tier)},
                        {"position", {{"lat", e.position.latitudeDeg}, {"lon", e.position.longitudeDeg}}},
                        {"freeCpuMillicores", e.freeCpuMillicores},
                        {"freeRamMb", e.freeRamMb},
                        {"freeDiskMb", e.freeDiskMb},
                        {"antennaSerialsAvailable", e.antennaSerialsAvailable}};
    if (include_timestamps) j["lastRefreshedUs"] = e.lastRefreshed;
    arr.push_back(std::move(j));
  }
  return {{"entries", std::move(arr)}};
}

std::vector<ResourceCatalogEntry> resource_catalog_from_json(const nlohmann::json& j) {
  std::vector<ResourceCatalogEntry> entries;
  for (const auto& je : j.at("entries")) {
    ResourceCatalogEntry e;
    e.nodeId = je.at("nodeId").get<std::string>();
    e.tier = parse_tier(je.at("tier").get<std::string>());
    e.position = {je.at("position").at("lat").get<double>(), je.at("position").at("lon").get<double>()};
    e.freeCpuMillicores = je.at("freeCpuMillicores").get<std::int64_t>();
    e.freeRamMb = je.at("freeRamMb").get<std::int64_t>();
    e.freeDiskMb = je.at("freeDiskMb").get<std::int64_t>();
    e.antennaSerialsAvailable = je.at("antennaSerialsAvailable").get<std::vector<std::string>>();
    e.lastRefreshed = je.value("lastRefreshedUs", TimestampUs{0});
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ResourceCatalogEntry> ResourceCatalog::refresh(const Topology& topology, TimestampUs now) {
  auto fresh = build_resource_catalog(topology, now);
  std::unique_lock lock(mutex_);
  entries_ = fresh;
  ++refreshes_;
  if (snapshot_path_) {
    json_util::write_file_atomic(*snapshot_path_, resource_catalog_to_json(entries_).dump(2) + "\n");
  }
  return fresh;
}

std::vector<ResourceCatalogEntry> ResourceCatalog::entries() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

std::optional<ResourceCatalogEntry> ResourceCatalog::find(const std::string& nodeId) const {
  std::shared_lock lock(mutex_);
  for (const auto& e : entries_) {
    if (e.nodeId == nodeId) return e;
  }
  return std::nullopt;
}

std::uint64_t ResourceCatalog::refresh_count() const {
  std::shared_lock lock(mutex_);
  return refreshes_;
}

std::vector<ResourceCatalogEntry> ResourceCatalog::load(const std::filesystem::path& path) {
  try {
    return resource_catalog_from_json(json_util::parse(json_util::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

UnitRecord& UnitSet::of(UnitKind kind) {
  switch (kind) {
    case UnitKind::kCu: return cu;
    case UnitKind::kDu: return du;
    case UnitKind::kRu: return ru;
  }
  return cu;
}

const UnitRecord& UnitSet::of(UnitKind kind) const {
  return const_cast<UnitSet*>(this)->of(kind);
}

void check_record_invariants(const DeploymentRecord& record) {
  if (record.deploymentId.empty()) throw Error(ErrorCode::kInvalidArgument, "record without id");
  if (record.units) {
    for (auto kind : kAllUnitKinds) {
      const auto& unit = record.units->of(kind);
      if (unit.unitKind != kind) {
        throw Error(ErrorCode::kInvalidArgument, record.deploymentId + ": unit kind mismatch");
      }
      if (unit.antennaSerial.has_value() != (kind == UnitKind::kRu)) {
        throw Error(ErrorCode::kInvalidArgument,
                    record.deploymentId + ": antennaSerial must be present iff unit is RU");
      }
      if (!unit.ipAddress) {
        throw Error(ErrorCode::kInvalidArgument,
                    record.deploymentId + ": unit " + unit.unitId + " has no IP address");
      }
    }
  }
  for (std::size_t i = 1; i < record.eventLog.size(); ++i) {
    if (record.eventLog[i].timestampUs < record.eventLog[i - 1].timestampUs) {
      throw Error(ErrorCode::kInvalidArgument, record.deploymentId + ": event log not monotonic");
    }
  }
}

nlohmann::json unit_to_json(const UnitRecord& unit) {
  nlohmann::json j = {{"unitId", unit.unitId},
                      {"unitKind", to_string(unit.unitKind)},
                      {"nodeId", unit.nodeId},
                      {"configDocument", unit.configDocument},
                      {"state", to_string(unit.state)}};
  j["ipAddress"] = unit.ipAddress ? nlohmann::json(*unit.ipAddress) : nlohmann::json(nullptr);
  j["antennaSerial"] = unit.antennaSerial ? nlohmann::json(*unit.antennaSerial) : nlohmann::json(nullptr);
  return j;
}

UnitRecord unit_from_json(const nlohmann::json& j) {
  UnitRecord u;
  u.unitId = j.at("unitId").get<std::string>();
  u.unitKind = parse_unit_kind(j.at("unitKind").get<std::string>());
  u.nodeId = j.at("nodeId").get<std::string>();
  if (!j.at("ipAddress").is_null()) u.ipAddress = j["ipAddress"].get<std::string>();
  if (!j.at("antennaSerial").is_null()) u.antennaSerial = j["antennaSerial"].get<std::string>();
  u.configDocument = j.at("configDocument").get<std::map<std::string, std::string>>();
  u.state = parse_unit_state(j.at("state").get<std::string>());
  return u;
}

nlohmann::json deployment_to_json(const DeploymentRecord& record) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : record.eventLog) {
    events.push_back({{"timestampUs", e.timestampUs}, {"step", e.step}, {"detail", e.detail}});
  }
  nlohmann::json history = nlohmann::json::array();
  for (const auto& t : record.lifecycleHistory) {
    history.push_back({{"timestampUs", t.timestampUs}, {"state", to_string(t.state)}});
  }
  nlohmann::json j = {{"deploymentId", record.deploymentId},
                      {"tag", record.tag},
                      {"order", order_to_json(record.order)},
                      {"lifecycle", to_string(record.lifecycle)},
                      {"eventLog", std::move(events)},
                      {"lifecycleHistory", std::move(history)},
                      {"timeline", timeline_to_json(record.timeline)},
                      {"createdAtUs", record.createdAtUs}};
  if (record.units) {
    j["units"] = {{"cu", unit_to_json(record.units->cu)},
                  {"du", unit_to_json(record.units->du)},
                  {"ru", unit_to_json(record.units->ru)}};
  } else {
    j["units"] = nullptr;
  }
  j["chain"] = record.chain ? chain_to_json(*record.chain) : nlohmann::json(nullptr);
  j["abortCause"] = record.abortCause ? nlohmann::json(*record.abortCause) : nlohmann::json(nullptr);
  return j;
}

DeploymentRecord deployment_from_json(const nlohmann::json& j) {
  DeploymentRecord r;
  try {
    r.deploymentId = j.at("deploymentId").get<std::string>();
    r.tag = j.at("tag").get<std::string>();
    r.order = order_from_json(j.at("order"));
    r.lifecycle = parse_lifecycle_state(j.at("lifecycle").get<std::string>());
    for (const auto& e : j.at("eventLog")) {
      r.eventLog.push_back(
          {e.at("timestampUs").get<TimestampUs>(), e.at("step").get<std::string>(), e.at("detail").get<std::string>()});
    }
    for (const auto& t : j.at("lifecycleHistory")) {
      r.lifecycleHistory.push_back(
          {t.at("timestampUs").get<TimestampUs>(), parse_lifecycle_state(t.at("state").get<std::string>())});
    }
    r.timeline = timeline_from_json(j.at("timeline"));
    r.createdAtUs = j.at("createdAtUs").get<TimestampUs>();
    if (!j.at("units").is_null()) {
      const auto& u = j["units"];
      r.units = UnitSet{unit_from_json(u.at("cu")), unit_from_json(u.at("du")), unit_from_json(u.at("ru"))};
    }
    if (!j.at("chain").is_null()) r.chain = chain_from_json(j["chain"]);
    if (!j.at("abortCause").is_null()) r.abortCause = j["abortCause"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("deployment record: ") + e.what());
  }
  return r;
}

std::string DeploymentCatalog::allocate_id() {
  std::unique_lock lock(mutex_);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "d-%03llu", static_cast<unsigned long long>(next_id_++));
  persist_locked();
  return buf;
}

void DeploymentCatalog::put(const DeploymentRecord& record) {
  check_record_invariants(record);
  std::unique_lock lock(mutex_);
  auto it = records_.find(record.deploymentId);
  if (it != records_.end()) {
    if (!is_advancing(it->second.lifecycle, record.lifecycle)) {
      throw Error(ErrorCode::kInvalidState,
                  record.deploymentId + ": lifecycle " + std::string(to_string(it->second.lifecycle)) +
                      " -> " + std::string(to_string(record.lifecycle)) + " does not advance");
    }
    it->second = record;
  } else {
    records_.emplace(record.deploymentId, record);
  }
  persist_locked();
}

std::optional<DeploymentRecord> DeploymentCatalog::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<DeploymentRecord> DeploymentCatalog::list(const DeploymentFilter& filter) const {
  std::vector<DeploymentRecord> out;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, r] : records_) {
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

DeploymentRecord DeploymentCatalog::remove(const std::string& id) {
  std::unique_lock lock(mutex_);
  auto it = records_.find(id);
  if (it == records_.end()) throw Error(ErrorCode::kUnknownDeployment, "unknown deployment " + id);
  const auto state = it->second.lifecycle;
  if (state != LifecycleState::kRunning && !is_terminal(state)) {
    throw Error(ErrorCode::kInvalidState,
                id + ": cannot delete while " + std::string(to_string(state)));
  }
  DeploymentRecord removed = std::move(it->second);
  records_.erase(it);
  persist_locked();
  return removed;
}

std::size_t DeploymentCatalog::size() const {
  std::shared_lock lock(mutex_);
  return records_.size();
}

nlohmann::json DeploymentCatalog::to_json_locked() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [id, r] : records_) arr.push_back(deployment_to_json(r));
  return {{"nextId", next_id_}, {"deployments", std::move(arr)}};
}

nlohmann::json DeploymentCatalog::to_json() const {
  std::shared_lock lock(mutex_);
  return to_json_locked();
}

void DeploymentCatalog::persist_locked() const {
  if (snapshot_path_) json_util::write_file_atomic(*snapshot_path_, to_json_locked().dump(2) + "\n");
}

void DeploymentCatalog::save(const std::filesystem::path& path) const {
  std::shared_lock lock(mutex_);
  json_util::write_file_atomic(path, to_json_locked().dump(2) + "\n");
}

void DeploymentCatalog::restore(const std::filesystem::path& path) {
  const auto doc = json_util::parse(json_util::read_file(path));
  std::map<std::string, DeploymentRecord> records;
  std::uint64_t next_id = 1;
  try {
    next_id = doc.at("nextId").get<std::uint64_t>();
    for (const auto& jr : doc.at("deployments")) {
      auto r = deployment_from_json(jr);
      std::string id = r.deploymentId;
      records.emplace(std::move(id), std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  std::unique_lock lock(mutex_);
  records_ = std::move(records);
  next_id_ = next_id;
}

bool DeploymentCatalog::operator==(const DeploymentCatalog& o) const {
  if (this == &o) return true;
  std::shared_lock a(mutex_);
  std::shared_lock b(o.mutex_);
  return next_id_ == o.next_id_ && records_ == o.records_;
}

}  // namespace ztc
