// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ztc/catalogs.hpp"
#include "ztc/error.hpp"
#include "ztc/json_util.hpp"

namespace ztc {
namespace {

using testing::fixture_topology;

DeploymentRecord make_record(const std::string& id, const std::string& tag, LifecycleState state,
                             TimestampUs createdAt = 0) {
  DeploymentRecord r;
  r.deploymentId = id;
  r.tag = tag;
  r.order = testing::fixture_order();
  r.order.tag = tag;
  r.lifecycle = state;
  r.createdAtUs = createdAt;
  return r;
}

TEST(ResourceCatalog, FreshFixtureListsEveryNodeAndAntenna) {
  const auto entries = build_resource_catalog(fixture_topology(), 5);
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].nodeId, "edge-1");
  EXPECT_EQ(entries[1].nodeId, "faredge-1");
  EXPECT_EQ(entries[1].antennaSerialsAvailable, (std::vector<std::string>{"A-SER-001", "A-SER-002"}));
  EXPECT_EQ(entries[2].freeCpuMillicores, 16000);
  EXPECT_EQ(entries[2].lastRefreshed, 5);
}

TEST(ResourceCatalog, OccupiedAntennaIsNotListed) {
  Substrate s(fixture_topology());
  s.claim({"d-001", {{"faredge-1", {1500, 1024, 1024}}}, "A-SER-001"});
  const auto entries = build_resource_catalog(s.snapshot(), 0);
  EXPECT_EQ(entries[1].antennaSerialsAvailable, (std::vector<std::string>{"A-SER-002"}));
  EXPECT_EQ(entries[1].freeCpuMillicores, 2500);
}

TEST(ResourceCatalog, FullNodeStillListedWithZeroFree) {
  Substrate s(fixture_topology());
  s.claim({"d-001", {{"edge-1", {8000, 0, 0}}}, std::nullopt});
  const auto entries = build_resource_catalog(s.snapshot(), 0);
  ASSERT_EQ(entries.size(), 3u);
  EXPECT_EQ(entries[0].freeCpuMillicores, 0);
}

TEST(ResourceCatalog, SnapshotFileRoundTrips) {
  testing::TempDir dir;
  ResourceCatalog catalog(dir.path() / "resource_catalog.json");
  const auto published = catalog.refresh(fixture_topology(), 42);
  EXPECT_EQ(ResourceCatalog::load(dir.path() / "resource_catalog.json"), published);
  EXPECT_EQ(catalog.refresh_count(), 1u);
  EXPECT_EQ(catalog.find("edge-1")->freeCpuMillicores, 8000);
  EXPECT_FALSE(catalog.find("nope"));
}

TEST(ResourceCatalog, ReadersNeverSeeHalfAppliedRefresh) {
  Topology a = fixture_topology();
  Topology b = fixture_topology();
  reserve_resources(b.mutable_node("edge-1"), {1000, 0, 0});
  reserve_resources(b.mutable_node("faredge-1"), {1000, 0, 0});
  ResourceCatalog catalog;
  catalog.refresh(a, 0);
  std::atomic<bool> done{false};
  std::atomic<int> torn{0};
  std::thread reader([&] {
    while (!done) {
      const auto e = catalog.entries();
      if (e[0].freeCpuMillicores - e[1].freeCpuMillicores != 4000) ++torn;
    }
  });
  for (int i = 0; i < 2000; ++i) catalog.refresh(i % 2 ? a : b, i);
  done = true;
  reader.join();
  EXPECT_EQ(torn.load(), 0);
}

TEST(DeploymentCatalog, PutListsNewRecord) {
  DeploymentCatalog c;
  c.put(make_record("d-001", "stadium", LifecycleState::kPending));
  ASSERT_EQ(c.list().size(), 1u);
  EXPECT_EQ(c.list()[0].deploymentId, "d-001");
}

TEST(DeploymentCatalog, AdvancingUpdateAccepted) {
  DeploymentCatalog c;
  c.put(make_record("d-001", "t", LifecycleState::kDeploying));
  c.put(make_record("d-001", "t", LifecycleState::kRunning));
  EXPECT_EQ(c.get("d-001")->lifecycle, LifecycleState::kRunning);
}

TEST(DeploymentCatalog, RegressionRejected) {
  DeploymentCatalog c;
  c.put(make_record("d-001", "t", LifecycleState::kRunning));
  try {
    c.put(make_record("d-001", "t", LifecycleState::kPending));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidState);
  }
  EXPECT_EQ(c.get("d-001")->lifecycle, LifecycleState::kRunning);
}

TEST(DeploymentCatalog, ListFilters) {
  DeploymentCatalog c;
  EXPECT_TRUE(c.list().empty());
  c.put(make_record("d-001", "stadium", LifecycleState::kPending, 1));
  c.put(make_record("d-002", "campus", LifecycleState::kPending, 2));
  DeploymentFilter byTag;
  byTag.tag = "stadium";
  const auto tagged = c.list(byTag);
  ASSERT_EQ(tagged.size(), 1u);
  EXPECT_EQ(tagged[0].deploymentId, "d-001");
  DeploymentFilter running;
  running.state = LifecycleState::kRunning;
  EXPECT_TRUE(c.list(running).empty());
}

TEST(DeploymentCatalog, RemoveRunningReturnsRecord) {
  DeploymentCatalog c;
  c.put(make_record("d-001", "t", LifecycleState::kRunning));
  EXPECT_EQ(c.remove("d-001").deploymentId, "d-001");
  EXPECT_TRUE(c.list().empty());
}

TEST(DeploymentCatalog, RemoveUnknownAndInFlight) {
  DeploymentCatalog c;
  c.put(make_record("d-001", "t", LifecycleState::kDeploying));
  try {
    c.remove("d-404");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownDeployment);
  }
  try {
    c.remove("d-001");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidState);
  }
  EXPECT_EQ(c.size(), 1u);
}

TEST(DeploymentCatalog, IdsAreNeverReused) {
  DeploymentCatalog c;
  std::set<std::string> seen;
  for (int i = 0; i < 50; ++i) {
    const std::string id = c.allocate_id();
    EXPECT_TRUE(seen.insert(id).second);
    c.put(make_record(id, "t", LifecycleState::kRunning));
    c.remove(id);
  }
  EXPECT_EQ(*seen.begin(), "d-001");
}

TEST(DeploymentCatalog, PersistenceRoundTrip) {
  testing::TempDir dir;
  DeploymentCatalog c(dir.path() / "deployment_catalog.json");
  c.allocate_id();
  c.put(make_record("d-001", "stadium", LifecycleState::kRunning, 7));
  c.put(make_record("d-002", "campus", LifecycleState::kValidating, 8));
  DeploymentCatalog restored;
  restored.restore(dir.path() / "deployment_catalog.json");
  EXPECT_TRUE(restored == c);
  EXPECT_EQ(restored.allocate_id(), "d-002");
}

TEST(DeploymentRecordJson, RoundTripsAFullPipelineRecord) {
  ManualClock clock(1000);
  DeploymentEngine engine(fixture_topology(), clock);
  const DeploymentRecord r = engine.run_pipeline(testing::fixture_order());
  ASSERT_EQ(r.lifecycle, LifecycleState::kRunning);
  EXPECT_EQ(deployment_from_json(deployment_to_json(r)), r);
}

TEST(ResourceCatalogProperty, RecomputedEqualsIncremental) {
  // After any sequence of deployments and teardowns, the published catalog
  // equals one rebuilt from the live substrate.
  std::mt19937_64 rng(21);
  ManualClock clock(1);
  DeploymentEngine engine(fixture_topology(), clock);
  std::vector<std::string> running;
  for (int i = 0; i < 60; ++i) {
    if (!running.empty() && std::bernoulli_distribution(0.5)(rng)) {
      engine.teardown(running.back());
      running.pop_back();
    } else {
      const auto r = engine.run_pipeline(testing::fixture_order());
      if (r.lifecycle == LifecycleState::kRunning) running.push_back(r.deploymentId);
    }
    const auto published = engine.resource_catalog();
    const auto rebuilt = build_resource_catalog(engine.substrate_snapshot(), 0);
    EXPECT_EQ(resource_catalog_to_json(published, false), resource_catalog_to_json(rebuilt, false));
    std::set<std::string> serials;
    for (const auto& e : published)
      for (const auto& s : e.antennaSerialsAvailable) EXPECT_TRUE(serials.insert(s).second);
    EXPECT_EQ(serials.size() + running.size(), 2u);
  }
}

}  // namespace
}  // namespace ztc
