// SPDX-License-Identifier: Apache-2.0

#include <functional>
#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ztc/deployment_engine.hpp"
#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {
namespace {

using testing::capture;
using testing::fixture_order;
using testing::fixture_topology;

std::vector<std::string> step_labels(const DeploymentRecord& r) {
  std::vector<std::string> out;
  for (const auto& e : r.eventLog) out.push_back(e.step);
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected ztc::Error";
  return ErrorCode::kIo;
}

TEST(RunPipeline, FeasibleFixtureOrderRuns) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  const DeploymentRecord r = engine.run_pipeline(fixture_order());
  ASSERT_EQ(r.lifecycle, LifecycleState::kRunning) << r.abortCause.value_or("");
  EXPECT_EQ(r.deploymentId, "d-001");
  EXPECT_EQ(step_labels(r), pipeline_steps());
  EXPECT_EQ(r.chain->antennaSerial, "A-SER-001");
  EXPECT_EQ(r.units->ru.antennaSerial, "A-SER-001");
  EXPECT_EQ(engine.deployment_catalog().get("d-001")->lifecycle, LifecycleState::kRunning);
  for (std::size_t i = 1; i < r.lifecycleHistory.size(); ++i) {
    EXPECT_TRUE(is_allowed_transition(r.lifecycleHistory[i - 1].state, r.lifecycleHistory[i].state));
  }
  EXPECT_EQ(r.lifecycleHistory.front().state, LifecycleState::kPending);
  EXPECT_EQ(r.lifecycleHistory.back().state, LifecycleState::kRunning);
  EXPECT_EQ(r.lifecycleHistory.size(), 8u);
}

TEST(RunPipeline, UnreachableCoverageAbortsWithoutSideEffects) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  const auto before = capture(engine);
  const DeploymentRecord r = engine.run_pipeline(testing::unreachable_order());
  EXPECT_EQ(r.lifecycle, LifecycleState::kAborted);
  EXPECT_EQ(r.abortCause, kNoCandidateReason);
  EXPECT_EQ(r.eventLog.back().step, steps::kAbort);
  EXPECT_EQ(capture(engine), before);
  EXPECT_EQ(engine.deployment("d-001")->lifecycle, LifecycleState::kAborted);
}

TEST(RunPipeline, TwoOrdersUseDistinctAntennas) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  const auto a = engine.run_pipeline(fixture_order());
  const auto b = engine.run_pipeline(fixture_order());
  ASSERT_EQ(a.lifecycle, LifecycleState::kRunning);
  ASSERT_EQ(b.lifecycle, LifecycleState::kRunning);
  EXPECT_NE(a.chain->antennaSerial, b.chain->antennaSerial);
  const auto c = engine.run_pipeline(fixture_order());
  EXPECT_EQ(c.lifecycle, LifecycleState::kAborted);
  std::set<std::string> ips;
  for (const auto& r : {a, b})
    for (auto kind : kAllUnitKinds) EXPECT_TRUE(ips.insert(*r.units->of(kind).ipAddress).second);
}

TEST(RunPipeline, UnitsStartInRadioFirstOrderAfterAffiliation) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  const auto r = engine.run_pipeline(fixture_order());
  std::vector<std::string> starts;
  for (const auto& e : engine.bus().trace(r.deploymentId)) {
    if (e.at("kind") == "StartCommand" && e.at("direction") == "S->C") starts.push_back(e.at("targetUnit"));
  }
  EXPECT_EQ(starts, (std::vector<std::string>{"d-001/ru", "d-001/du", "d-001/cu"}));
}

TEST(RunPipeline, UnitStartDelayIsChargedPerUnit) {
  ManualClock clock(1);
  EngineOptions options;
  options.unitStartDelay = std::chrono::milliseconds(2);
  DeploymentEngine engine(fixture_topology(), clock, options);
  const auto r = engine.run_pipeline(fixture_order());
  ASSERT_TRUE(r.timeline.tRanRunning && r.timeline.tRanDeployStart);
  EXPECT_EQ(*r.timeline.tRanRunning - *r.timeline.tRanDeployStart, 6000);
}

TEST(RunPipeline, ArtifactsWrittenUnderDataDir) {
  testing::TempDir dir;
  ManualClock clock(1);
  EngineOptions options;
  options.dataDir = dir.path();
  DeploymentEngine engine(fixture_topology(), clock, options);
  const auto r = engine.run_pipeline(fixture_order());
  ASSERT_EQ(r.lifecycle, LifecycleState::kRunning);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "manifests" / "d-001" / "ru.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "traces" / "d-001.jsonl"));
  DeploymentCatalog restored;
  restored.restore(dir.path() / "deployment_catalog.json");
  EXPECT_TRUE(restored == engine.deployment_catalog());
  EXPECT_EQ(ResourceCatalog::load(dir.path() / "resource_catalog.json"), engine.resource_catalog());
  engine.teardown("d-001");
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "manifests" / "d-001"));
}

TEST(RunPipeline, InvalidOrderRejectedBeforeRegistration) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  ServiceOrder o = fixture_order();
  o.maxUsers = 0;
  EXPECT_THROW(engine.run_pipeline(o), Error);
  EXPECT_TRUE(engine.deployments().empty());
}

TEST(Teardown, RestoresBaselineCatalog) {
  testing::TempDir dir;
  ManualClock clock(1);
  EngineOptions options;
  options.dataDir = dir.path();
  DeploymentEngine engine(fixture_topology(), clock, options);
  const auto baseline = capture(engine);
  const std::string baselineFile = json_util::read_file(dir.path() / "resource_catalog.json");
  engine.run_pipeline(fixture_order());
  EXPECT_NE(capture(engine).resourceCatalog, baseline.resourceCatalog);
  const TeardownSummary s = engine.teardown("d-001");
  EXPECT_EQ(s.releasedAntenna, "A-SER-001");
  EXPECT_EQ(s.releasedIps.size(), 3u);
  EXPECT_EQ(capture(engine).resourceCatalog, baseline.resourceCatalog);
  EXPECT_EQ(json_util::read_file(dir.path() / "resource_catalog.json"), baselineFile);
  EXPECT_TRUE(engine.ip_pool().leases().empty());
  const auto r = engine.deployment("d-001");
  EXPECT_EQ(r->lifecycle, LifecycleState::kDeleted);
  EXPECT_EQ(r->eventLog.back().step, steps::kTeardown);
  for (auto kind : kAllUnitKinds) EXPECT_EQ(r->units->of(kind).state, UnitState::kStopped);
  EXPECT_FALSE(engine.bus().has("d-001/ru"));
}

TEST(Teardown, SecondCallErrors) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  engine.run_pipeline(fixture_order());
  engine.teardown("d-001");
  EXPECT_EQ(code_of([&] { engine.teardown("d-001"); }), ErrorCode::kInvalidState);
}

TEST(Teardown, UnknownIdErrors) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  EXPECT_EQ(code_of([&] { engine.teardown("d-404"); }), ErrorCode::kUnknownDeployment);
}

TEST(DeleteDeployment, RunningIsTornDownAndForgotten) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  const auto baseline = capture(engine);
  engine.run_pipeline(fixture_order());
  const DeploymentRecord removed = engine.delete_deployment("d-001");
  EXPECT_EQ(removed.lifecycle, LifecycleState::kDeleted);
  EXPECT_FALSE(engine.deployment("d-001"));
  EXPECT_EQ(engine.deployment_catalog().size(), 0u);
  EXPECT_EQ(capture(engine), baseline);
  EXPECT_EQ(code_of([&] { engine.delete_deployment("d-001"); }), ErrorCode::kUnknownDeployment);
}

TEST(DeleteDeployment, AbortedRecordCanBeDismissed) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  engine.run_pipeline(testing::unreachable_order());
  EXPECT_EQ(engine.delete_deployment("d-001").lifecycle, LifecycleState::kAborted);
  EXPECT_TRUE(engine.deployments().empty());
}

TEST(CreateUnits, FixtureManifestsYieldThreeLeasedUnits) {
  ManualClock clock(1);
  Substrate substrate(fixture_topology());
  IpPool pool;
  AgentBus bus(clock);
  const ChainCandidate chain{"regional-1", "edge-1", "faredge-1", "A-SER-001", 0.8};
  const UnitSet units = create_units("d-001", render_manifests(chain, fixture_order()), substrate, pool, bus, clock);
  EXPECT_EQ(*units.cu.ipAddress, "10.42.0.2");
  EXPECT_EQ(*units.du.ipAddress, "10.42.0.3");
  EXPECT_EQ(*units.ru.ipAddress, "10.42.0.4");
  EXPECT_EQ(substrate.snapshot().node("faredge-1").antennas[0].occupiedBy, "d-001");
  for (auto kind : kAllUnitKinds) EXPECT_TRUE(bus.has(units.of(kind).unitId));
}

TEST(CreateUnits, OccupiedAntennaRollsBack) {
  ManualClock clock(1);
  Substrate substrate(fixture_topology());
  substrate.claim({"d-other", {}, "A-SER-001"});
  const Topology before = substrate.snapshot();
  IpPool pool;
  AgentBus bus(clock);
  const ChainCandidate chain{"regional-1", "edge-1", "faredge-1", "A-SER-001", 0.8};
  EXPECT_EQ(code_of([&] {
              create_units("d-001", render_manifests(chain, fixture_order()), substrate, pool, bus, clock);
            }),
            ErrorCode::kAntennaUnavailable);
  EXPECT_EQ(substrate.snapshot(), before);
  EXPECT_EQ(pool.leased_count(), 0u);
  EXPECT_FALSE(bus.has("d-001/cu"));
}

TEST(CreateUnits, CapacityTakenAfterValidationRollsBack) {
  ManualClock clock(1);
  Substrate substrate(fixture_topology());
  const ChainCandidate chain{"regional-1", "edge-1", "faredge-1", "A-SER-001", 0.8};
  ASSERT_TRUE(validate_chain(chain, fixture_order(), substrate.snapshot()).pass);
  substrate.claim({"d-other", {{"faredge-1", {3000, 0, 0}}}, std::nullopt});
  const Topology before = substrate.snapshot();
  IpPool pool;
  AgentBus bus(clock);
  EXPECT_EQ(code_of([&] {
              create_units("d-001", render_manifests(chain, fixture_order()), substrate, pool, bus, clock);
            }),
            ErrorCode::kInsufficientCapacity);
  EXPECT_EQ(substrate.snapshot(), before);
}

TEST(CreateUnits, PoolExhaustionRollsBackClaim) {
  ManualClock clock(1);
  Substrate substrate(fixture_topology());
  const Topology before = substrate.snapshot();
  IpPool pool("10.42.0.2", "10.42.0.3");
  AgentBus bus(clock);
  const ChainCandidate chain{"regional-1", "edge-1", "faredge-1", "A-SER-001", 0.8};
  EXPECT_EQ(code_of([&] {
              create_units("d-001", render_manifests(chain, fixture_order()), substrate, pool, bus, clock);
            }),
            ErrorCode::kPoolExhausted);
  EXPECT_EQ(substrate.snapshot(), before);
  EXPECT_EQ(pool.leased_count(), 0u);
}

TEST(RunPipeline, PoolExhaustionAbortsAndCompensates) {
  ManualClock clock(1);
  EngineOptions options;
  options.ipPoolFirst = "10.42.0.2";
  options.ipPoolLast = "10.42.0.3";
  DeploymentEngine engine(fixture_topology(), clock, options);
  const auto before = capture(engine);
  const auto r = engine.run_pipeline(fixture_order());
  EXPECT_EQ(r.lifecycle, LifecycleState::kAborted);
  EXPECT_NE(r.abortCause->find("exhausted"), std::string::npos);
  EXPECT_EQ(capture(engine), before);
}

TEST(Submit, AsyncPipelinesComplete) {
  SteadyClock clock;
  DeploymentEngine engine(fixture_topology(), clock);
  const std::string a = engine.submit(fixture_order());
  const std::string b = engine.submit(fixture_order());
  EXPECT_EQ(a, "d-001");
  EXPECT_EQ(b, "d-002");
  engine.wait_idle();
  DeploymentFilter running;
  running.state = LifecycleState::kRunning;
  EXPECT_EQ(engine.deployments(running).size(), 2u);
}

TEST(Events, MirrorEventLogs) {
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  engine.run_pipeline(fixture_order());
  engine.run_pipeline(testing::unreachable_order());
  engine.teardown("d-001");
  const auto events = engine.events_since(0);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].sequence, i + 1);
  for (const auto& r : engine.deployments()) {
    std::vector<std::string> fromEvents;
    for (const auto& e : events)
      if (e.deploymentId == r.deploymentId) fromEvents.push_back(e.step);
    EXPECT_EQ(fromEvents, step_labels(r));
  }
  EXPECT_TRUE(engine.events_since(events.back().sequence).empty());
}

}  // namespace
}  // namespace ztc
