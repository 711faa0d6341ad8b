// SPDX-License-Identifier: Apache-2.0
//
// Randomized properties of placement and of the deployment engine.

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ztc/deployment_engine.hpp"
#include "ztc/error.hpp"

namespace ztc {
namespace {

using testing::random_case;

Selection pipeline_selection(const testing::RandomCase& c) {
  return place(c.order, build_resource_catalog(c.topology, 0), c.topology, c.policy).selection;
}

bool same_selection(const Selection& a, const Selection& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<Infeasible>(a)) return std::get<Infeasible>(a) == std::get<Infeasible>(b);
  return std::get<ChainCandidate>(a).same_assignment(std::get<ChainCandidate>(b));
}

TEST(PlacementProperty, PipelineMatchesOracle) {
  std::mt19937_64 rng(101);
  int selected = 0;
  for (int i = 0; i < 400; ++i) {
    const auto c = random_case(rng);
    const Selection oracle = oracle_select(c.order, build_resource_catalog(c.topology, 0), c.topology, c.policy);
    EXPECT_TRUE(same_selection(pipeline_selection(c), oracle))
        << "case " << i << ": " << selection_to_json(pipeline_selection(c)).dump() << " vs "
        << selection_to_json(oracle).dump();
    selected += std::holds_alternative<ChainCandidate>(oracle);
  }
  EXPECT_GT(selected, 40);  // the generator must exercise both outcomes
  EXPECT_LT(selected, 360);
}

TEST(PlacementProperty, SelectedChainsAreSound) {
  std::mt19937_64 rng(102);
  for (int i = 0; i < 400; ++i) {
    const auto c = random_case(rng);
    const Selection s = pipeline_selection(c);
    if (const auto* chain = std::get_if<ChainCandidate>(&s)) {
      EXPECT_EQ(testing::constraint_violations(*chain, c.order, c.topology), std::vector<std::string>{})
          << "case " << i;
      if (c.policy.enforceTierMapping) {
        EXPECT_EQ(c.topology.node(chain->cuNodeId).tier, CloudTier::kRegional);
        EXPECT_EQ(c.topology.node(chain->duNodeId).tier, CloudTier::kEdge);
      }
      EXPECT_EQ(c.topology.node(chain->ruNodeId).tier, CloudTier::kFarEdge);
    }
  }
}

TEST(PlacementProperty, RaisingABudgetNeverMakesSelectedInfeasible) {
  std::mt19937_64 rng(103);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_case(rng);
    if (!std::holds_alternative<ChainCandidate>(pipeline_selection(c))) continue;
    for (int which = 0; which < 4; ++which) {
      auto weaker = c;
      auto& k = weaker.order.constraints;
      if (which == 0) k.fronthaulLatencyMsMax *= 2;
      if (which == 1) k.midhaulLatencyMsMax *= 2;
      if (which == 2) k.endToEndLatencyMsMax *= 2;
      if (which == 3) k.fronthaulBandwidthMbpsMin /= 2;
      EXPECT_TRUE(std::holds_alternative<ChainCandidate>(pipeline_selection(weaker))) << "case " << i;
    }
  }
}

TEST(PlacementProperty, DeterministicAcrossRuns) {
  std::mt19937_64 rng(104);
  for (int i = 0; i < 200; ++i) {
    const auto c = random_case(rng);
    const auto a = place(c.order, build_resource_catalog(c.topology, 0), c.topology, c.policy);
    const auto b = place(c.order, build_resource_catalog(c.topology, 0), c.topology, c.policy);
    EXPECT_EQ(selection_to_json(a.selection), selection_to_json(b.selection));
    EXPECT_EQ(a.scored, b.scored);
  }
}

TEST(PlacementProperty, ScoresWithinUnitInterval) {
  std::mt19937_64 rng(105);
  for (int i = 0; i < 300; ++i) {
    const auto c = random_case(rng);
    for (const auto& chain : place(c.order, build_resource_catalog(c.topology, 0), c.topology, c.policy).scored) {
      ASSERT_TRUE(chain.score);
      EXPECT_GE(*chain.score, 0.0);
      EXPECT_LE(*chain.score, 1.0);
    }
  }
}

// --- engine ---------------------------------------------------------------

// Reservations of live deployments plus pre-existing load equal the node
// counters; occupied antennas belong to live deployments; leases are unique.
void check_engine_invariants(const DeploymentEngine& engine, const Topology& initial) {
  const Topology now = engine.substrate_snapshot();
  std::map<std::string, ResourceDemand> expected;
  for (const auto& [id, n] : initial.nodes()) expected[id] = n.used();
  std::map<std::string, std::string> antennaOwner;
  std::set<std::string> ips;
  for (const auto& r : engine.deployments()) {
    if (r.lifecycle != LifecycleState::kRunning) continue;
    for (const auto& [node, demand] : claim_for(r.deploymentId, *r.chain, r.order).reservations) {
      expected[node] += demand;
    }
    antennaOwner[r.chain->antennaSerial] = r.deploymentId;
    for (auto kind : kAllUnitKinds) EXPECT_TRUE(ips.insert(*r.units->of(kind).ipAddress).second);
  }
  EXPECT_EQ(ips.size(), engine.ip_pool().leased_count());
  for (const auto& [id, n] : now.nodes()) {
    EXPECT_EQ(n.used(), expected[id]) << id;
    EXPECT_TRUE(n.used().fits_within(n.capacity()));
    for (std::size_t a = 0; a < n.antennas.size(); ++a) {
      const auto& antenna = n.antennas[a];
      if (initial.node(id).antennas[a].occupiedBy) {
        EXPECT_EQ(antenna.occupiedBy, initial.node(id).antennas[a].occupiedBy);
      } else if (antennaOwner.count(antenna.serial)) {
        EXPECT_EQ(antenna.occupiedBy, antennaOwner[antenna.serial]);
      } else {
        EXPECT_FALSE(antenna.occupiedBy) << antenna.serial;
      }
    }
  }
}

TEST(EngineProperty, RandomDeployTeardownSequencesKeepAccountingExact) {
  std::mt19937_64 rng(106);
  for (int round = 0; round < 40; ++round) {
    auto c = random_case(rng);
    c.order.constraints.endToEndLatencyMsMax = 10.0;
    ManualClock clock(1);
    EngineOptions options;
    options.policy = c.policy;
    DeploymentEngine engine(c.topology, clock, options);
    const auto baseline = testing::capture(engine);
    std::vector<std::string> live;
    for (int step = 0; step < 12; ++step) {
      if (!live.empty() && std::bernoulli_distribution(0.4)(rng)) {
        const auto pick = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
        engine.teardown(live[pick]);
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(pick));
      } else {
        const auto before = testing::capture(engine);
        const auto r = engine.run_pipeline(c.order);
        if (r.lifecycle == LifecycleState::kRunning) {
          live.push_back(r.deploymentId);
        } else {
          EXPECT_EQ(r.lifecycle, LifecycleState::kAborted);
          EXPECT_EQ(testing::capture(engine), before);
        }
      }
      check_engine_invariants(engine, c.topology);
    }
    for (const auto& id : live) engine.teardown(id);
    EXPECT_EQ(testing::capture(engine).resourceCatalog, baseline.resourceCatalog);
    EXPECT_EQ(testing::capture(engine).used, baseline.used);
    EXPECT_EQ(testing::capture(engine).antennaOccupancy, baseline.antennaOccupancy);
  }
}

TEST(EngineProperty, EveryObservedTransitionIsAllowed) {
  std::mt19937_64 rng(107);
  for (int round = 0; round < 60; ++round) {
    const auto c = random_case(rng);
    ManualClock clock(1);
    EngineOptions options;
    options.policy = c.policy;
    DeploymentEngine engine(c.topology, clock, options);
    const auto r = engine.run_pipeline(c.order);
    if (r.lifecycle == LifecycleState::kRunning) engine.teardown(r.deploymentId);
    const auto final = engine.deployment(r.deploymentId);
    for (std::size_t i = 1; i < final->lifecycleHistory.size(); ++i) {
      EXPECT_TRUE(is_allowed_transition(final->lifecycleHistory[i - 1].state, final->lifecycleHistory[i].state));
    }
  }
}

}  // namespace
}  // namespace ztc
