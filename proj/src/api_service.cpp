// SPDX-License-Identifier: Apache-2.0

#include "ztc/api_service.hpp"

#include <charconv>
#include <sstream>

#include "ztc/error.hpp"

namespace ztc {

namespace {

double us_to_ms(TimestampUs us) { return static_cast<double>(us) / 1000.0; }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::istringstream in(path);
  std::string part;
  while (std::getline(in, part, '/')) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument:
      return 400;
    case ErrorCode::kUnknownDeployment:
    case ErrorCode::kUnknownNode:
      return 404;
    case ErrorCode::kInvalidState:
      return 409;
    default:
      return 500;
  }
}

std::optional<std::string> query_value(const std::map<std::string, std::string>& query, const std::string& key) {
  auto it = query.find(key);
  if (it == query.end()) return std::nullopt;
  return it->second;
}

}  // namespace

// ---------------------------------------------------------------------------

KpiReport kpi_report(const DeploymentRecord& record) {
  if (!record.timeline.tRanDeployStart || !record.timeline.tRanRunning) {
    throw Error(ErrorCode::kInvalidState, record.deploymentId + ": RAN timeline incomplete");
  }
  KpiReport report;
  report.deploymentId = record.deploymentId;
  report.timeline = record.timeline;
  const TimestampUs begin = *record.timeline.tRanDeployStart;
  const TimestampUs end = *record.timeline.tRanRunning;
  report.deploymentDurationMs = us_to_ms(end - begin);
  TimestampUs previous = begin;
  for (const auto& e : record.eventLog) {
    if (e.timestampUs > end) break;
    report.steps.push_back({e.step, us_to_ms(e.timestampUs - previous)});
    previous = e.timestampUs;
    if (e.step == steps::kStart) break;
  }
  return report;
}

nlohmann::json kpi_to_json(const KpiReport& r) {
  nlohmann::json stepsJson = nlohmann::json::array();
  for (const auto& s : r.steps) stepsJson.push_back({{"step", s.step}, {"durationMs", s.durationMs}});
  return {{"deploymentId", r.deploymentId},
          {"timeline", timeline_to_json(r.timeline)},
          {"deploymentDurationMs", r.deploymentDurationMs},
          {"steps", std::move(stepsJson)}};
}

nlohmann::json usage_to_json(const UsageSample& s) {
  return {{"nodeId", s.nodeId},
          {"timestampUs", s.timestampUs},
          {"cpuUsedMillicores", s.cpuUsedMillicores},
          {"ramUsedMb", s.ramUsedMb},
          {"diskUsedMb", s.diskUsedMb}};
}

std::vector<UsageSample> usage_snapshot(const Topology& topology, TimestampUs now) {
  std::vector<UsageSample> out;
  for (const auto& [id, node] : topology.nodes()) {
    out.push_back({id, now, node.cpuUsedMillicores, node.ramUsedMb, node.diskUsedMb});
  }
  return out;
}

// ---------------------------------------------------------------------------

UsageSampler::UsageSampler(const DeploymentEngine& engine, std::chrono::milliseconds interval, std::size_t history)
    : engine_(engine), interval_(interval), history_(std::max<std::size_t>(history, 1)) {}

UsageSampler::~UsageSampler() { stop(); }

void UsageSampler::start() {
  std::lock_guard lock(mutex_);
  if (worker_.joinable()) return;
  stopping_ = false;
  worker_ = std::thread([this] {
    std::unique_lock lock(mutex_);
    while (!stopping_) {
      lock.unlock();
      sample_now();
      lock.lock();
      cv_.wait_for(lock, interval_, [this] { return stopping_; });
    }
  });
}

void UsageSampler::stop() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

std::vector<UsageSample> UsageSampler::sample_now() {
  auto round = usage_snapshot(engine_.substrate_snapshot(), engine_.clock().now_us());
  std::lock_guard lock(mutex_);
  rounds_.push_back(round);
  while (rounds_.size() > history_) rounds_.pop_front();
  return round;
}

std::vector<UsageSample> UsageSampler::samples() const {
  std::lock_guard lock(mutex_);
  std::vector<UsageSample> out;
  for (const auto& round : rounds_) out.insert(out.end(), round.begin(), round.end());
  return out;
}

// ---------------------------------------------------------------------------

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", code}, {"message", message}}};
}

ApiService::ApiService(DeploymentEngine& engine, UsageSampler* sampler) : engine_(engine), sampler_(sampler) {}

ApiResponse ApiService::handle(const std::string& method, const std::string& path,
                               const std::map<std::string, std::string>& query, const std::string& body) {
  const auto parts = split_path(path);
  try {
    if (parts.size() < 2 || parts[0] != "api") return error_response(404, "not_found", "no route for " + path);
    const std::string& resource = parts[1];
    if (resource == "orders" && parts.size() == 2) {
      if (method == "POST") return post_order(query, body);
    } else if (resource == "deployments" && parts.size() == 2) {
      if (method == "GET") return list_deployments(query);
    } else if (resource == "deployments" && parts.size() == 3) {
      if (method == "GET") return get_deployment(parts[2]);
      if (method == "DELETE") return delete_deployment(parts[2]);
    } else if (resource == "nodes" && parts.size() == 2) {
      if (method == "GET") return list_nodes();
    } else if (resource == "nodes" && parts.size() == 3) {
      if (method == "GET") return get_node(parts[2]);
    } else if (resource == "metrics" && parts.size() == 2) {
      if (method == "GET") return metrics();
    } else if (resource == "events" && parts.size() == 2) {
      if (method == "GET") return events(query);
    } else {
      return error_response(404, "not_found", "no route for " + path);
    }
    return error_response(405, "method_not_allowed", method + " " + path);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), std::string(to_string(e.code())), e.what());
  }
}

ApiResponse ApiService::post_order(const std::map<std::string, std::string>& query, const std::string& body) {
  const ServiceOrder order = parse_order(body);
  const auto sync = query_value(query, "sync");
  if (sync && (*sync == "true" || *sync == "1")) {
    const DeploymentRecord record = engine_.run_pipeline(order);
    if (record.lifecycle == LifecycleState::kAborted) {
      return {409,
              {{"deploymentId", record.deploymentId},
               {"lifecycle", to_string(record.lifecycle)},
               {"reason", record.abortCause.value_or("aborted")}}};
    }
    return {202, {{"deploymentId", record.deploymentId}, {"lifecycle", to_string(record.lifecycle)}}};
  }
  const std::string id = engine_.submit(order);
  return {202, {{"deploymentId", id}, {"lifecycle", to_string(LifecycleState::kPending)}}};
}

ApiResponse ApiService::list_deployments(const std::map<std::string, std::string>& query) const {
  DeploymentFilter filter;
  filter.tag = query_value(query, "tag");
  if (auto state = query_value(query, "state")) filter.state = parse_lifecycle_state(*state);
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : engine_.deployments(filter)) arr.push_back(deployment_to_json(r));
  return {200, {{"deployments", std::move(arr)}}};
}

ApiResponse ApiService::get_deployment(const std::string& id) const {
  auto record = engine_.deployment(id);
  if (!record) return error_response(404, "unknown_deployment", "unknown deployment " + id);
  return {200, deployment_to_json(*record)};
}

ApiResponse ApiService::delete_deployment(const std::string& id) {
  DeploymentRecord removed = engine_.delete_deployment(id);
  return {200, {{"deploymentId", id}, {"lifecycle", to_string(removed.lifecycle)}}};
}

nlohmann::json ApiService::node_view(const ResourceCatalogEntry& entry, const Topology& topology) const {
  nlohmann::json j = resource_catalog_to_json({entry}).at("entries").at(0);
  if (!topology.contains(entry.nodeId)) return j;
  const Node& node = topology.node(entry.nodeId);
  j["capacity"] = {{"cpuMillicores", node.cpuCapacityMillicores},
                   {"ramMb", node.ramCapacityMb},
                   {"diskMb", node.diskCapacityMb}};
  nlohmann::json antennas = nlohmann::json::array();
  std::size_t occupied = 0;
  for (const auto& a : node.antennas) {
    if (a.occupiedBy) ++occupied;
    antennas.push_back({{"serial", a.serial},
                        {"position", {{"lat", a.position.latitudeDeg}, {"lon", a.position.longitudeDeg}}},
                        {"occupiedBy", a.occupiedBy ? nlohmann::json(*a.occupiedBy) : nlohmann::json(nullptr)}});
  }
  j["antennas"] = std::move(antennas);
  j["antennasOccupied"] = occupied;
  j["antennasAvailable"] = entry.antennaSerialsAvailable.size();
  return j;
}

ApiResponse ApiService::list_nodes() const {
  const auto entries = engine_.resource_catalog();
  const auto topology = engine_.substrate_snapshot();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back(node_view(e, topology));
  return {200, {{"nodes", std::move(arr)}}};
}

ApiResponse ApiService::get_node(const std::string& id) const {
  for (const auto& e : engine_.resource_catalog()) {
    if (e.nodeId == id) return {200, node_view(e, engine_.substrate_snapshot())};
  }
  return error_response(404, "unknown_node", "unknown node " + id);
}

ApiResponse ApiService::metrics() const {
  nlohmann::json kpis = nlohmann::json::array();
  for (const auto& r : engine_.deployments()) {
    if (r.timeline.tRanDeployStart && r.timeline.tRanRunning) kpis.push_back(kpi_to_json(kpi_report(r)));
  }
  const auto samples = sampler_ ? sampler_->samples()
                                : usage_snapshot(engine_.substrate_snapshot(), engine_.clock().now_us());
  nlohmann::json usage = nlohmann::json::array();
  for (const auto& s : samples) usage.push_back(usage_to_json(s));
  return {200, {{"kpis", std::move(kpis)}, {"usage", std::move(usage)}}};
}

ApiResponse ApiService::events(const std::map<std::string, std::string>& query) const {
  std::uint64_t since = 0;
  if (auto raw = query_value(query, "since")) {
    std::int64_t value = 0;
    const char* first = raw->data();
    const char* last = first + raw->size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (raw->empty() || ec != std::errc() || ptr != last || value < 0) {
      return error_response(400, "parse", "since must be a non-negative integer");
    }
    since = static_cast<std::uint64_t>(value);
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : engine_.events_since(since)) arr.push_back(event_to_json(e));
  return {200, {{"events", std::move(arr)}}};
}

}  // namespace ztc
