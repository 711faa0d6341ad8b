// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ztc/deployment_engine.hpp"

namespace ztc {

struct StepDuration {
  std::string step;
  double durationMs = 0.0;
};

struct KpiReport {
  std::string deploymentId;
  KpiTimeline timeline;
  // tRanRunning - tRanDeployStart
  double deploymentDurationMs = 0.0;
  // Time between consecutive event-log entries, starting at tRanDeployStart.
  std::vector<StepDuration> steps;
};

// Requires a Running (or later) record with a complete RAN timeline.
KpiReport kpi_report(const DeploymentRecord& record);
nlohmann::json kpi_to_json(const KpiReport& report);

// Substrate counters of one node at one instant.
struct UsageSample {
  std::string nodeId;
  TimestampUs timestampUs = 0;
  std::int64_t cpuUsedMillicores = 0;
  std::int64_t ramUsedMb = 0;
  std::int64_t diskUsedMb = 0;

  bool operator==(const UsageSample&) const = default;
};

nlohmann::json usage_to_json(const UsageSample& sample);
std::vector<UsageSample> usage_snapshot(const Topology& topology, TimestampUs now);

// Periodically records per-node utilization. Keeps the most recent
// `history` rounds.
class UsageSampler {
 public:
  explicit UsageSampler(const DeploymentEngine& engine, std::chrono::milliseconds interval = std::chrono::seconds(1),
                        std::size_t history = 600);
  ~UsageSampler();

  UsageSampler(const UsageSampler&) = delete;
  UsageSampler& operator=(const UsageSampler&) = delete;

  void start();
  void stop();
  // One sample per node, all from the same substrate snapshot.
  std::vector<UsageSample> sample_now();
  std::vector<UsageSample> samples() const;

 private:
  const DeploymentEngine& engine_;
  std::chrono::milliseconds interval_;
  std::size_t history_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  bool stopping_ = false;
  std::deque<std::vector<UsageSample>> rounds_;
  std::thread worker_;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Transport-independent REST handler. GET requests never change state.
class ApiService {
 public:
  explicit ApiService(DeploymentEngine& engine, UsageSampler* sampler = nullptr);

  ApiResponse handle(const std::string& method, const std::string& path,
                     const std::map<std::string, std::string>& query = {}, const std::string& body = {});

 private:
  ApiResponse post_order(const std::map<std::string, std::string>& query, const std::string& body);
  ApiResponse list_deployments(const std::map<std::string, std::string>& query) const;
  ApiResponse get_deployment(const std::string& id) const;
  ApiResponse delete_deployment(const std::string& id);
  ApiResponse list_nodes() const;
  ApiResponse get_node(const std::string& id) const;
  ApiResponse metrics() const;
  ApiResponse events(const std::map<std::string, std::string>& query) const;

  nlohmann::json node_view(const ResourceCatalogEntry& entry, const Topology& topology) const;

  DeploymentEngine& engine_;
  UsageSampler* sampler_;
};

ApiResponse error_response(int status, const std::string& code, const std::string& message);

// Blocking HTTP server over ApiService. `stop()` may be called from any thread.
class HttpServer {
 public:
  explicit HttpServer(ApiService& api);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds; port 0 picks an ephemeral port. Returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ztc
