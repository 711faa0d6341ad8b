// SPDX-License-Identifier: Apache-2.0

#include <thread>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ztc/api_service.hpp"
#include "ztc/json_util.hpp"

namespace ztc {
namespace {

std::string fixture_order_text() { return json_util::read_file(testing::fixture_path("order.json")); }

struct Api {
  explicit Api(Topology t = testing::fixture_topology()) : engine(std::move(t), clock), api(engine) {}
  ManualClock clock{1};
  DeploymentEngine engine;
  ApiService api;
};

TEST(SubmitOrder, ValidOrderAccepted) {
  Api a;
  const ApiResponse r = a.api.handle("POST", "/api/orders", {}, fixture_order_text());
  EXPECT_EQ(r.status, 202);
  EXPECT_EQ(r.body.at("deploymentId"), "d-001");
  a.engine.wait_idle();
  EXPECT_EQ(a.engine.deployment("d-001")->lifecycle, LifecycleState::kRunning);
}

TEST(SubmitOrder, MissingCoverageCenterIs400) {
  Api a;
  auto doc = json_util::parse(fixture_order_text());
  doc.erase("coverageCenter");
  EXPECT_EQ(a.api.handle("POST", "/api/orders", {}, doc.dump()).status, 400);
  EXPECT_EQ(a.api.handle("POST", "/api/orders", {}, "{not json").status, 400);
  EXPECT_TRUE(a.engine.deployments().empty());
}

TEST(SubmitOrder, SyncWithoutAntennasIs409) {
  Api a(testing::antennaless_topology());
  const ApiResponse r = a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(r.body.at("reason"), "infeasible: no candidate chain");
}

TEST(SubmitOrder, SyncFeasibleReportsRunning) {
  Api a;
  const ApiResponse r = a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  EXPECT_EQ(r.status, 202);
  EXPECT_EQ(r.body.at("lifecycle"), "Running");
}

TEST(Deployments, ListGetAndFilter) {
  Api a;
  a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  EXPECT_EQ(a.api.handle("GET", "/api/deployments").body.at("deployments").size(), 1u);
  EXPECT_EQ(a.api.handle("GET", "/api/deployments", {{"tag", "lannion-campus"}}).body.at("deployments").size(), 1u);
  EXPECT_EQ(a.api.handle("GET", "/api/deployments", {{"tag", "other"}}).body.at("deployments").size(), 0u);
  EXPECT_EQ(a.api.handle("GET", "/api/deployments", {{"state", "Aborted"}}).body.at("deployments").size(), 0u);
  EXPECT_EQ(a.api.handle("GET", "/api/deployments", {{"state", "Bogus"}}).status, 400);
  const ApiResponse one = a.api.handle("GET", "/api/deployments/d-001");
  EXPECT_EQ(one.status, 200);
  EXPECT_EQ(one.body.at("lifecycle"), "Running");
  EXPECT_EQ(a.api.handle("GET", "/api/deployments/d-404").status, 404);
}

TEST(Deployments, DeleteFreesAntenna) {
  Api a;
  a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  EXPECT_EQ(a.api.handle("GET", "/api/nodes/faredge-1").body.at("antennasOccupied"), 1);
  EXPECT_EQ(a.api.handle("DELETE", "/api/deployments/d-001").status, 200);
  EXPECT_EQ(a.api.handle("GET", "/api/nodes/faredge-1").body.at("antennasOccupied"), 0);
  EXPECT_EQ(a.api.handle("DELETE", "/api/deployments/d-001").status, 404);
}

TEST(Nodes, MirrorCatalogWithAntennaCounts) {
  Api a;
  const ApiResponse r = a.api.handle("GET", "/api/nodes");
  ASSERT_EQ(r.body.at("nodes").size(), 3u);
  const auto far = a.api.handle("GET", "/api/nodes/faredge-1").body;
  EXPECT_EQ(far.at("antennasAvailable"), 2);
  EXPECT_EQ(far.at("antennasOccupied"), 0);
  EXPECT_EQ(far.at("antennas").size(), 2u);
  EXPECT_EQ(a.api.handle("GET", "/api/nodes/nope").status, 404);
}

TEST(Metrics, EmptyKpisWithoutDeployments) {
  Api a;
  const auto body = a.api.handle("GET", "/api/metrics").body;
  EXPECT_TRUE(body.at("kpis").empty());
  EXPECT_EQ(body.at("usage").size(), 3u);
}

TEST(Metrics, OneKpiAfterDeployment) {
  Api a;
  a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  const auto kpis = a.api.handle("GET", "/api/metrics").body.at("kpis");
  ASSERT_EQ(kpis.size(), 1u);
  EXPECT_LT(kpis[0].at("deploymentDurationMs").get<double>(), 1000.0);
  EXPECT_EQ(kpis[0].at("steps").size(), pipeline_steps().size());
}

TEST(Metrics, UsageReturnsToBaselineAfterTeardown) {
  Api a;
  UsageSampler sampler(a.engine, std::chrono::milliseconds(1000));
  ApiService api(a.engine, &sampler);
  const auto first = sampler.sample_now();
  api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  const auto during = sampler.sample_now();
  api.handle("DELETE", "/api/deployments/d-001");
  const auto last = sampler.sample_now();
  auto values = [](const std::vector<UsageSample>& round) {
    std::vector<std::tuple<std::string, std::int64_t, std::int64_t, std::int64_t>> v;
    for (const auto& s : round) v.emplace_back(s.nodeId, s.cpuUsedMillicores, s.ramUsedMb, s.diskUsedMb);
    return v;
  };
  EXPECT_NE(values(during), values(first));
  EXPECT_EQ(values(last), values(first));
  EXPECT_EQ(api.handle("GET", "/api/metrics").body.at("usage").size(), 9u);
}

TEST(Metrics, SamplerRunsInBackground) {
  Api a;
  UsageSampler sampler(a.engine, std::chrono::milliseconds(5), 4);
  sampler.start();
  std::this_thread::sleep_for(std::chrono::milliseconds(60));
  sampler.stop();
  const auto samples = sampler.samples();
  EXPECT_GE(samples.size(), 6u);
  EXPECT_LE(samples.size(), 12u);  // 4 rounds of 3 nodes
}

TEST(Events, SinceCursor) {
  Api a;
  a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  const auto events = a.api.handle("GET", "/api/events", {{"since", "0"}}).body.at("events");
  std::vector<std::string> steps;
  for (const auto& e : events) steps.push_back(e.at("step"));
  EXPECT_EQ(steps, pipeline_steps());
  const std::string last = std::to_string(events.back().at("sequence").get<std::uint64_t>());
  EXPECT_TRUE(a.api.handle("GET", "/api/events", {{"since", last}}).body.at("events").empty());
  EXPECT_EQ(a.api.handle("GET", "/api/events", {{"since", "-1"}}).status, 400);
  EXPECT_EQ(a.api.handle("GET", "/api/events", {{"since", "abc"}}).status, 400);
}

TEST(Routing, UnknownRoutesAndMethods) {
  Api a;
  EXPECT_EQ(a.api.handle("GET", "/api/unknown").status, 404);
  EXPECT_EQ(a.api.handle("GET", "/").status, 404);
  EXPECT_EQ(a.api.handle("PUT", "/api/orders").status, 405);
}

TEST(ApiProperty, GetRequestsNeverMutateState) {
  Api a;
  a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());
  a.api.handle("POST", "/api/orders", {{"sync", "true"}}, fixture_order_text());  // aborts: antennas exhausted
  const std::string digest = a.engine.state_digest();
  const std::vector<std::pair<std::string, std::map<std::string, std::string>>> gets = {
      {"/api/deployments", {}},        {"/api/deployments", {{"state", "Running"}}},
      {"/api/deployments/d-001", {}},  {"/api/deployments/d-404", {}},
      {"/api/nodes", {}},              {"/api/nodes/faredge-1", {}},
      {"/api/metrics", {}},            {"/api/events", {{"since", "0"}}},
      {"/api/events", {{"since", "-3"}}}};
  for (int round = 0; round < 3; ++round) {
    for (const auto& [path, query] : gets) {
      a.api.handle("GET", path, query);
      EXPECT_EQ(a.engine.state_digest(), digest) << path;
    }
  }
}

TEST(KpiReport, StepDurationsSumToTotal) {
  ManualClock clock(1);
  EngineOptions options;
  options.unitStartDelay = std::chrono::microseconds(1500);
  DeploymentEngine engine(testing::fixture_topology(), clock, options);
  const auto r = engine.run_pipeline(testing::fixture_order());
  const KpiReport k = kpi_report(r);
  double sum = 0.0;
  for (const auto& s : k.steps) sum += s.durationMs;
  EXPECT_NEAR(sum, k.deploymentDurationMs, 1e-9);
  EXPECT_DOUBLE_EQ(k.deploymentDurationMs, 4.5);
}

}  // namespace
}  // namespace ztc
