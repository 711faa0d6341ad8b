// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>

#include <json.hpp>

#include "ztc/clock.hpp"

namespace ztc {

enum class LifecycleState {
  kPending,
  kDiscovering,
  kValidating,
  kRendering,
  kDeploying,
  kConfiguring,
  kAffiliating,
  kRunning,
  kDeleting,
  kDeleted,
  kAborted,
};

std::string_view to_string(LifecycleState state);
LifecycleState parse_lifecycle_state(std::string_view text);

// Forward chain Pending -> ... -> Running -> Deleting -> Deleted; any state
// before Running may drop to Aborted.
bool is_allowed_transition(LifecycleState from, LifecycleState to);
bool is_pre_running(LifecycleState state);
bool is_terminal(LifecycleState state);
// True when `to` is strictly later than `from` in the lifecycle (skips allowed).
bool is_advancing(LifecycleState from, LifecycleState to);

enum class UnitState { kCreated, kConfigured, kAffiliated, kRunning, kStopped };

std::string_view to_string(UnitState state);
UnitState parse_unit_state(std::string_view text);

struct KpiTimeline {
  std::optional<TimestampUs> tZtcDeployStart;
  std::optional<TimestampUs> tZtcRunning;
  std::optional<TimestampUs> tRanDeployStart;
  std::optional<TimestampUs> tRanRunning;

  bool complete() const { return tZtcDeployStart && tZtcRunning && tRanDeployStart && tRanRunning; }
  bool strictly_increasing() const;
  bool operator==(const KpiTimeline&) const = default;
};

nlohmann::json timeline_to_json(const KpiTimeline& t);
KpiTimeline timeline_from_json(const nlohmann::json& j);

}  // namespace ztc
