// SPDX-License-Identifier: Apache-2.0

#include "ztc/lifecycle.hpp"

#include <array>
#include <string>

#include "ztc/error.hpp"

namespace ztc {

namespace {

constexpr std::array<std::string_view, 11> kLifecycleNames = {
    "Pending",   "Discovering", "Validating", "Rendering", "Deploying", "Configuring",
    "Affiliating", "Running",   "Deleting",   "Deleted",   "Aborted"};

constexpr std::array<std::string_view, 5> kUnitStateNames = {"Created", "Configured", "Affiliated",
                                                             "Running", "Stopped"};

int rank(LifecycleState s) { return static_cast<int>(s); }

}  // namespace

std::string_view to_string(LifecycleState state) { return kLifecycleNames[rank(state)]; }

LifecycleState parse_lifecycle_state(std::string_view text) {
  for (std::size_t i = 0; i < kLifecycleNames.size(); ++i) {
    if (kLifecycleNames[i] == text) return static_cast<LifecycleState>(i);
  }
  throw Error(ErrorCode::kParse, "unknown lifecycle state \"" + std::string(text) + "\"");
}

bool is_pre_running(LifecycleState state) { return rank(state) < rank(LifecycleState::kRunning); }

bool is_terminal(LifecycleState state) {
  return state == LifecycleState::kDeleted || state == LifecycleState::kAborted;
}

bool is_allowed_transition(LifecycleState from, LifecycleState to) {
  if (to == LifecycleState::kAborted) return is_pre_running(from);
  if (from == LifecycleState::kAborted || from == LifecycleState::kDeleted) return false;
  return rank(to) == rank(from) + 1;
}

bool is_advancing(LifecycleState from, LifecycleState to) {
  if (to == LifecycleState::kAborted) return is_pre_running(from);
  if (from == LifecycleState::kAborted) return false;
  return rank(to) > rank(from);
}

std::string_view to_string(UnitState state) { return kUnitStateNames[static_cast<int>(state)]; }

UnitState parse_unit_state(std::string_view text) {
  for (std::size_t i = 0; i < kUnitStateNames.size(); ++i) {
    if (kUnitStateNames[i] == text) return static_cast<UnitState>(i);
  }
  throw Error(ErrorCode::kParse, "unknown unit state \"" + std::string(text) + "\"");
}

bool KpiTimeline::strictly_increasing() const {
  if (!complete()) return false;
  return *tZtcDeployStart < *tZtcRunning && *tZtcRunning < *tRanDeployStart &&
         *tRanDeployStart < *tRanRunning;
}

namespace {
nlohmann::json opt(const std::optional<TimestampUs>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
std::optional<TimestampUs> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<TimestampUs>();
}
}  // namespace

nlohmann::json timeline_to_json(const KpiTimeline& t) {
  return {{"tZtcDeployStartUs", opt(t.tZtcDeployStart)},
          {"tZtcRunningUs", opt(t.tZtcRunning)},
          {"tRanDeployStartUs", opt(t.tRanDeployStart)},
          {"tRanRunningUs", opt(t.tRanRunning)}};
}

KpiTimeline timeline_from_json(const nlohmann::json& j) {
  return {opt_from(j, "tZtcDeployStartUs"), opt_from(j, "tZtcRunningUs"), opt_from(j, "tRanDeployStartUs"),
          opt_from(j, "tRanRunningUs")};
}

}  // namespace ztc
