#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "crowdnav/control/policy.hpp"
#include "crowdnav/session/sim.hpp"

using namespace crowdnav;
using namespace crowdnav::control;

namespace {

task::ScenarioCatalog catalog() {
  return task::ScenarioCatalog::load_dir(std::filesystem::path(CROWDNAV_ASSET_DIR) / "scenarios");
}

session::SnapshotMessage snapshot_of(const session::SessionSim& sim) {
  session::SnapshotMessage snap;
  snap.tick = sim.state().tick;
  snap.time = sim.sim_time();
  snap.phase = std::string(task::to_string(sim.tasks().phase));
  snap.follow = sim.tasks().follow_accum;
  for (const auto& a : sim.state().agents)
    snap.agents.push_back({a.id, a.kind, a.pose.x, a.pose.y, a.pose.theta, 0.0, 0.0, a.radius});
  return snap;
}

telemetry::MetricsSummary play(const task::Scenario& scenario, BotPolicy& policy, std::uint64_t seed = 5) {
  session::SimOptions opt;
  opt.session_seed = seed;
  session::SessionSim sim(scenario, opt);
  while (!sim.tasks().done() && sim.sim_time() < scenario.time_limit) sim.step(policy.decide(snapshot_of(sim)));
  return sim.finish(sim.tasks().done() ? telemetry::Outcome::completed : telemetry::Outcome::expired);
}

}  // namespace

TEST(Policy, Names) {
  for (auto k : {PolicyKind::compliant, PolicyKind::idle, PolicyKind::wanderer}) EXPECT_EQ(parse_policy(to_string(k)), k);
  EXPECT_FALSE(parse_policy("greedy"));
}

TEST(Policy, KeysTowardEightSectors) {
  const char* expected[8] = {"D", "WD", "W", "WA", "A", "SA", "S", "SD"};
  for (int k = 0; k < 8; ++k) {
    for (double jitter : {-0.3, 0.0, 0.3}) {
      const double a = k * std::numbers::pi / 4 + jitter;
      EXPECT_EQ(keys_toward({std::cos(a), std::sin(a)}), AvatarCommand::from_keys(expected[k])) << k;
    }
  }
  EXPECT_EQ(keys_toward({0, 0}), AvatarCommand{});
}

TEST(Policy, WandererHoldsForOneSecondAndIsSeeded) {
  WandererPolicy a(3), b(3);
  session::SnapshotMessage snap;
  AvatarCommand held{};
  int changes = 0;
  for (int i = 0; i < 400; ++i) {
    snap.time = i * 0.05;
    const auto ca = a.decide(snap);
    EXPECT_EQ(ca, b.decide(snap));
    if (i % 20 != 0) {
      EXPECT_EQ(ca, held);
    } else if (!(ca == held)) {
      ++changes;
    }
    held = ca;
  }
  EXPECT_GT(changes, 5);
}

TEST(Policy, IdleNeverMoves) {
  auto cat = catalog();
  IdlePolicy idle;
  auto scenario = *cat.find("lab-1");
  scenario.time_limit = 20;
  const auto s = play(scenario, idle);
  EXPECT_FALSE(s.moved);
  EXPECT_FALSE(s.completed);
}

TEST(Policy, CompliantCompletesEveryShippedScenario) {
  auto cat = catalog();
  ASSERT_FALSE(cat.all().empty());
  for (const auto& [id, scenario] : cat.all()) {
    auto policy = make_policy(PolicyKind::compliant, scenario, 1);
    const auto s = play(scenario, *policy);
    EXPECT_TRUE(s.robot_found) << id;
    EXPECT_TRUE(s.completed) << id;
    EXPECT_TRUE(s.moved) << id;
  }
}

TEST(Policy, CompliantIsDeterministic) {
  auto cat = catalog();
  const auto& scenario = *cat.find("lab-1");
  auto p1 = make_policy(PolicyKind::compliant, scenario, 1);
  auto p2 = make_policy(PolicyKind::compliant, scenario, 1);
  EXPECT_EQ(play(scenario, *p1), play(scenario, *p2));
}
