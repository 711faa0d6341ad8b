// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ztc/catalogs.hpp"
#include "ztc/clock.hpp"

namespace ztc {

enum class MessageKind { kConfigPush, kAffiliationInfo, kStartCommand, kAck, kStatusReport };

std::string_view to_string(MessageKind kind);

using UnitConfig = std::map<std::string, std::string>;

// Config keys written by the controller.
inline constexpr const char* kSdrAddrsKey = "sdr_addrs";
inline constexpr const char* kDuIpKey = "duIp";
inline constexpr const char* kRuIpKey = "ruIp";
inline constexpr const char* kCuIpKey = "cuIp";

// "serial=<serial>", the OAI radio device selector.
std::string sdr_addrs_for(std::string_view antennaSerial);

struct AgentMessage {
  std::string messageId;
  MessageKind kind = MessageKind::kAck;
  std::string targetUnit;
  std::map<std::string, std::string> payload;

  bool operator==(const AgentMessage&) const = default;
};

nlohmann::json message_to_json(const AgentMessage& message);

// Hex FNV-1a 64 over the sorted key/value pairs.
std::string config_digest(const UnitConfig& config);

struct StatusReport {
  std::string unitId;
  UnitState state = UnitState::kCreated;
  std::string configDigest;
  double uptimeMs = 0.0;
};

// The agent co-deployed with one RAN unit. Messages are processed one
// at a time; a message id seen before is answered with the original Ack and
// not re-applied.
class UnitAgent {
 public:
  UnitAgent(UnitRecord unit, const Clock& clock);

  AgentMessage handle(const AgentMessage& message);
  UnitRecord snapshot() const;
  StatusReport status() const;
  void stop();

 private:
  AgentMessage apply(const AgentMessage& message);

  mutable std::mutex mutex_;
  UnitRecord unit_;
  const Clock& clock_;
  std::optional<TimestampUs> runningSince_;
  std::map<std::string, AgentMessage> acks_;
};

// Fault injection for the simulated transport.
struct DeliveryFaults {
  double dropRate = 0.0;       // request lost before reaching the agent
  double ackLossRate = 0.0;    // agent applied the message but the Ack is lost
  double duplicateRate = 0.0;  // request delivered twice
  std::uint64_t seed = 1;
};

// In-process message bus between the controller and its agents. Delivery is
// at-least-once: send() retries the same message id until an Ack arrives.
class AgentBus {
 public:
  explicit AgentBus(const Clock& clock, std::optional<std::filesystem::path> trace_dir = std::nullopt,
                    DeliveryFaults faults = {});

  void spawn(const UnitRecord& unit);
  void remove(const std::string& unitId);
  bool has(const std::string& unitId) const;
  std::shared_ptr<UnitAgent> agent(const std::string& unitId) const;

  std::string next_message_id(const std::string& deploymentId);

  // Throws Error(kUnknownUnit) for unknown targets, Error(kDelivery) after
  // `max_attempts` unacknowledged sends, and Error(kInvalidState) when the
  // agent rejects the message.
  AgentMessage send(const AgentMessage& message, int max_attempts = 16);

  std::vector<nlohmann::json> trace(const std::string& deploymentId) const;
  std::uint64_t delivered_count() const;

 private:
  void record(const std::string& deploymentId, nlohmann::json entry);
  bool roll(double rate);

  const Clock& clock_;
  std::optional<std::filesystem::path> trace_dir_;
  DeliveryFaults faults_;
  mutable std::mutex mutex_;
  std::mt19937_64 rng_;
  std::map<std::string, std::shared_ptr<UnitAgent>> agents_;
  std::map<std::string, std::uint64_t> message_counters_;
  std::map<std::string, std::vector<nlohmann::json>> traces_;
  std::uint64_t delivered_ = 0;
};

std::string unit_id_for(const std::string& deploymentId, UnitKind kind);
std::string deployment_of_unit(std::string_view unitId);

// --- Controller side of the affiliation protocol -------------------------

// Merges `config` into the unit's configuration; Created units become
// Configured.
AgentMessage push_config(AgentBus& bus, const std::string& unitId, const UnitConfig& config);

// Cross-wires peer IPs (RU<->DU, DU<->CU) and moves all three units to
// Affiliated. Nothing is sent unless every unit holds an IP.
void affiliate(AgentBus& bus, DeploymentRecord& record);

// Starts RU, DU and CU, stamps tRanRunning and moves the deployment to Running.
void start_units(AgentBus& bus, DeploymentRecord& record, const Clock& clock);

StatusReport report_status(const AgentBus& bus, const std::string& unitId);

}  // namespace ztc
