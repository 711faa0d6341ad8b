// SPDX-License-Identifier: Apache-2.0

#include "ztc/agents.hpp"

#include <cstdio>
#include <fstream>
#include <future>

#include "ztc/error.hpp"

namespace ztc {

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kConfigPush: return "ConfigPush";
    case MessageKind::kAffiliationInfo: return "AffiliationInfo";
    case MessageKind::kStartCommand: return "StartCommand";
    case MessageKind::kAck: return "Ack";
    case MessageKind::kStatusReport: return "StatusReport";
  }
  return "Ack";
}

std::string sdr_addrs_for(std::string_view antennaSerial) {
  return "serial=" + std::string(antennaSerial);
}

nlohmann::json message_to_json(const AgentMessage& m) {
  return {{"messageId", m.messageId},
          {"kind", to_string(m.kind)},
          {"targetUnit", m.targetUnit},
          {"payload", m.payload}};
}

std::string config_digest(const UnitConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : config) {
    mix(k);
    mix(std::string_view("\x1f", 1));
    mix(v);
    mix(std::string_view("\x1e", 1));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string unit_id_for(const std::string& deploymentId, UnitKind kind) {
  return deploymentId + "/" + std::string(short_name(kind));
}

std::string deployment_of_unit(std::string_view unitId) {
  return std::string(unitId.substr(0, unitId.find('/')));
}

// ---------------------------------------------------------------------------

UnitAgent::UnitAgent(UnitRecord unit, const Clock& clock) : unit_(std::move(unit)), clock_(clock) {}

UnitRecord UnitAgent::snapshot() const {
  std::lock_guard lock(mutex_);
  return unit_;
}

StatusReport UnitAgent::status() const {
  std::lock_guard lock(mutex_);
  StatusReport r;
  r.unitId = unit_.unitId;
  r.state = unit_.state;
  r.configDigest = config_digest(unit_.configDocument);
  if (runningSince_ && unit_.state == UnitState::kRunning) {
    r.uptimeMs = static_cast<double>(clock_.now_us() - *runningSince_) / 1000.0;
  }
  return r;
}

void UnitAgent::stop() {
  std::lock_guard lock(mutex_);
  unit_.state = UnitState::kStopped;
  runningSince_.reset();
}

AgentMessage UnitAgent::handle(const AgentMessage& message) {
  std::lock_guard lock(mutex_);
  if (auto it = acks_.find(message.messageId); it != acks_.end()) return it->second;
  AgentMessage ack = apply(message);
  acks_.emplace(message.messageId, ack);
  return ack;
}

AgentMessage UnitAgent::apply(const AgentMessage& message) {
  AgentMessage ack;
  ack.messageId = message.messageId + ".ack";
  ack.kind = MessageKind::kAck;
  ack.targetUnit = unit_.unitId;
  ack.payload["ackOf"] = message.messageId;
  auto reject = [&ack](const std::string& why) {
    ack.payload["status"] = "error";
    ack.payload["error"] = why;
    return ack;
  };

  if (unit_.state == UnitState::kStopped) return reject("unit stopped");
  switch (message.kind) {
    case MessageKind::kConfigPush:
      for (const auto& [k, v] : message.payload) unit_.configDocument[k] = v;
      if (unit_.state == UnitState::kCreated) unit_.state = UnitState::kConfigured;
      break;
    case MessageKind::kAffiliationInfo:
      if (unit_.state == UnitState::kCreated) return reject("affiliation before configuration");
      for (const auto& [k, v] : message.payload) unit_.configDocument[k] = v;
      if (unit_.state == UnitState::kConfigured) unit_.state = UnitState::kAffiliated;
      break;
    case MessageKind::kStartCommand:
      if (unit_.state == UnitState::kRunning) break;
      if (unit_.state != UnitState::kAffiliated) {
        return reject("start before affiliation (state " + std::string(to_string(unit_.state)) + ")");
      }
      unit_.state = UnitState::kRunning;
      runningSince_ = clock_.now_us();
      break;
    case MessageKind::kAck:
    case MessageKind::kStatusReport:
      return reject("unexpected message kind " + std::string(to_string(message.kind)));
  }
  ack.payload["status"] = "ok";
  ack.payload["state"] = std::string(to_string(unit_.state));
  ack.payload["configDigest"] = config_digest(unit_.configDocument);
  return ack;
}

// ---------------------------------------------------------------------------

AgentBus::AgentBus(const Clock& clock, std::optional<std::filesystem::path> trace_dir, DeliveryFaults faults)
    : clock_(clock), trace_dir_(std::move(trace_dir)), faults_(faults), rng_(faults.seed) {}

void AgentBus::spawn(const UnitRecord& unit) {
  std::lock_guard lock(mutex_);
  agents_[unit.unitId] = std::make_shared<UnitAgent>(unit, clock_);
}

void AgentBus::remove(const std::string& unitId) {
  std::shared_ptr<UnitAgent> agent;
  {
    std::lock_guard lock(mutex_);
    auto it = agents_.find(unitId);
    if (it == agents_.end()) return;
    agent = it->second;
    agents_.erase(it);
  }
  agent->stop();
}

bool AgentBus::has(const std::string& unitId) const {
  std::lock_guard lock(mutex_);
  return agents_.contains(unitId);
}

std::shared_ptr<UnitAgent> AgentBus::agent(const std::string& unitId) const {
  std::lock_guard lock(mutex_);
  auto it = agents_.find(unitId);
  if (it == agents_.end()) throw Error(ErrorCode::kUnknownUnit, "unknown unit " + unitId);
  return it->second;
}

std::string AgentBus::next_message_id(const std::string& deploymentId) {
  std::lock_guard lock(mutex_);
  return deploymentId + "-m" + std::to_string(++message_counters_[deploymentId]);
}

bool AgentBus::roll(double rate) {
  if (rate <= 0.0) return false;
  std::lock_guard lock(mutex_);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < rate;
}

void AgentBus::record(const std::string& deploymentId, nlohmann::json entry) {
  std::lock_guard lock(mutex_);
  if (trace_dir_) {
    std::filesystem::create_directories(*trace_dir_);
    std::ofstream out(*trace_dir_ / (deploymentId + ".jsonl"), std::ios::app);
    out << entry.dump() << "\n";
  }
  traces_[deploymentId].push_back(std::move(entry));
}

AgentMessage AgentBus::send(const AgentMessage& message, int max_attempts) {
  const auto deploymentId = deployment_of_unit(message.targetUnit);
  auto target = agent(message.targetUnit);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    auto entry = message_to_json(message);
    entry["t"] = clock_.now_us();
    entry["direction"] = "S->C";
    entry["attempt"] = attempt;
    record(deploymentId, entry);
    if (roll(faults_.dropRate)) continue;

    AgentMessage ack = target->handle(message);
    if (roll(faults_.duplicateRate)) ack = target->handle(message);
    {
      std::lock_guard lock(mutex_);
      ++delivered_;
    }
    if (roll(faults_.ackLossRate)) continue;

    auto ack_entry = message_to_json(ack);
    ack_entry["t"] = clock_.now_us();
    ack_entry["direction"] = "C->S";
    record(deploymentId, ack_entry);
    if (ack.payload["status"] != "ok") {
      throw Error(ErrorCode::kInvalidState, message.targetUnit + ": " + ack.payload["error"]);
    }
    return ack;
  }
  throw Error(ErrorCode::kDelivery, "no Ack for " + message.messageId + " after " +
                                        std::to_string(max_attempts) + " attempts");
}

std::vector<nlohmann::json> AgentBus::trace(const std::string& deploymentId) const {
  std::lock_guard lock(mutex_);
  auto it = traces_.find(deploymentId);
  return it == traces_.end() ? std::vector<nlohmann::json>{} : it->second;
}

std::uint64_t AgentBus::delivered_count() const {
  std::lock_guard lock(mutex_);
  return delivered_;
}

// ---------------------------------------------------------------------------

AgentMessage push_config(AgentBus& bus, const std::string& unitId, const UnitConfig& config) {
  if (!bus.has(unitId)) throw Error(ErrorCode::kUnknownUnit, "unknown unit " + unitId);
  AgentMessage m{bus.next_message_id(deployment_of_unit(unitId)), MessageKind::kConfigPush, unitId, config};
  return bus.send(m);
}

namespace {

void sync_units(const AgentBus& bus, DeploymentRecord& record) {
  for (auto kind : kAllUnitKinds) {
    auto& unit = record.units->of(kind);
    unit = bus.agent(unit.unitId)->snapshot();
  }
}

void require_units(const DeploymentRecord& record) {
  if (!record.units) {
    throw Error(ErrorCode::kInvalidState, record.deploymentId + ": no units created");
  }
}

}  // namespace

void affiliate(AgentBus& bus, DeploymentRecord& record) {
  require_units(record);
  auto& units = *record.units;
  for (auto kind : kAllUnitKinds) {
    const auto& unit = units.of(kind);
    if (!unit.ipAddress) {
      throw Error(ErrorCode::kInvalidState, unit.unitId + " has no IP lease; affiliation aborted");
    }
    if (!bus.has(unit.unitId)) throw Error(ErrorCode::kUnknownUnit, "unknown unit " + unit.unitId);
  }
  const std::string& cu_ip = *units.cu.ipAddress;
  const std::string& du_ip = *units.du.ipAddress;
  const std::string& ru_ip = *units.ru.ipAddress;
  const std::vector<std::pair<std::string, UnitConfig>> plan = {
      {units.ru.unitId, {{kDuIpKey, du_ip}}},
      {units.du.unitId, {{kRuIpKey, ru_ip}, {kCuIpKey, cu_ip}}},
      {units.cu.unitId, {{kDuIpKey, du_ip}}},
  };
  std::vector<std::future<AgentMessage>> acks;
  for (const auto& [unitId, payload] : plan) {
    AgentMessage m{bus.next_message_id(record.deploymentId), MessageKind::kAffiliationInfo, unitId, payload};
    acks.push_back(std::async(std::launch::async, [&bus, m] { return bus.send(m); }));
  }
  std::optional<Error> failure;
  for (auto& f : acks) {
    try {
      f.get();
    } catch (const Error& e) {
      if (!failure) failure = e;
    }
  }
  sync_units(bus, record);
  if (failure) throw *failure;
}

void start_units(AgentBus& bus, DeploymentRecord& record, const Clock& clock) {
  require_units(record);
  for (auto kind : kAllUnitKinds) {
    const auto& unit = bus.agent(record.units->of(kind).unitId)->snapshot();
    if (unit.state != UnitState::kAffiliated && unit.state != UnitState::kRunning) {
      throw Error(ErrorCode::kInvalidState,
                  unit.unitId + ": start requires Affiliated, found " + std::string(to_string(unit.state)));
    }
  }
  // Radio first, then DU, then CU.
  for (auto kind : {UnitKind::kRu, UnitKind::kDu, UnitKind::kCu}) {
    const auto& unitId = record.units->of(kind).unitId;
    bus.send({bus.next_message_id(record.deploymentId), MessageKind::kStartCommand, unitId, {}});
  }
  sync_units(bus, record);
  if (record.lifecycle == LifecycleState::kRunning) return;
  if (!is_allowed_transition(record.lifecycle, LifecycleState::kRunning)) {
    throw Error(ErrorCode::kInvalidState, record.deploymentId + ": cannot enter Running from " +
                                              std::string(to_string(record.lifecycle)));
  }
  const auto now = clock.now_us();
  record.lifecycle = LifecycleState::kRunning;
  record.lifecycleHistory.push_back({now, LifecycleState::kRunning});
  record.timeline.tRanRunning = now;
}

StatusReport report_status(const AgentBus& bus, const std::string& unitId) {
  return bus.agent(unitId)->status();
}

}  // namespace ztc
