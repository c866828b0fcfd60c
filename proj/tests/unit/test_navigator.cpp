#include <gtest/gtest.h>

#include "crowdnav/nav/navigator.hpp"
#include "crowdnav/world/world.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;
using namespace crowdnav::nav;

namespace {

AgentState make(int id, AgentKind kind, Pose2D p, double r = 0.3) {
  AgentState a;
  a.id = id;
  a.kind = kind;
  a.pose = p;
  a.radius = r;
  a.goal = p;
  if (kind == AgentKind::npc) a.desired_speed = 1.0;
  return a;
}

}  // namespace

TEST(Navigator, GoalAtCurrentPose) {
  auto g = oracle::shared_grid(oracle::room(40, 40, 0.25));
  RobotNavigator nav(g, {}, {5, 5, 0});
  const std::vector<AgentState> agents{make(1, AgentKind::robot, {5, 5, 0}, 0.25)};
  const auto r = nav.tick(agents, 1, 0.0);
  EXPECT_EQ(r.command, (RobotCommand{0, 0}));
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, NavEventKind::goal_reached);
  EXPECT_TRUE(nav.goal_reached());
  EXPECT_TRUE(nav.tick(agents, 1, 0.05).events.empty());
}

TEST(Navigator, UnreachableGoalStopsOnce) {
  auto grid = oracle::room(40, 40, 0.25);
  for (int r = 0; r < 40; ++r) grid.set({r, 20}, Cell::occupied);
  auto g = oracle::shared_grid(grid);
  RobotNavigator nav(g, {}, {8, 5, 0});
  const std::vector<AgentState> agents{make(1, AgentKind::robot, {2, 5, 0}, 0.25)};
  const auto first = nav.tick(agents, 1, 0.0);
  ASSERT_EQ(first.events.size(), 1u);
  EXPECT_EQ(first.events[0].kind, NavEventKind::nav_failed);
  EXPECT_GT(first.events[0].explored, 0u);
  EXPECT_EQ(first.command, (RobotCommand{0, 0}));
  int failures = 0;
  for (int i = 1; i < 100; ++i)
    for (const auto& e : nav.tick(agents, 1, i * 0.05).events) failures += e.kind == NavEventKind::nav_failed;
  EXPECT_EQ(failures, 0);
  EXPECT_THROW(nav.tick(agents, 9, 5.0), std::invalid_argument);
}

TEST(Navigator, ReplansOnCadence) {
  auto g = oracle::shared_grid(oracle::room(60, 40, 0.25));
  RobotNavigator nav(g, {}, {12, 5, 0});
  std::vector<AgentState> agents{make(1, AgentKind::robot, {2, 5, 0}, 0.25)};
  std::vector<double> plans;
  for (int i = 0; i < 100; ++i)
    for (const auto& e : nav.tick(agents, 1, i * 0.05).events)
      if (e.kind == NavEventKind::replanned) plans.push_back(e.sim_time);
  ASSERT_GE(plans.size(), 3u);
  EXPECT_NEAR(plans[1] - plans[0], 2.0, 1e-9);
}

TEST(Navigator, ReachesGoalInLab) {
  auto lab = oracle::shared_grid(OccupancyGrid::load(std::string(CROWDNAV_ASSET_DIR) + "/maps/lab.yaml"));
  world::World w(lab, {}, {make(0, AgentKind::avatar, {1, 1, 0}), make(1, AgentKind::robot, {11, 4, 3.14159}, 0.25)});
  RobotNavigator nav(lab, {}, {1, 4.5, 0});
  bool reached = false;
  for (int i = 0; i < 1200 && !reached; ++i) {
    const auto r = nav.tick(w.state().agents, 1, w.sim_time());
    for (const auto& e : r.events) reached = reached || e.kind == NavEventKind::goal_reached;
    w.step(0.05, {}, r.command);
  }
  EXPECT_TRUE(reached);
}

TEST(Navigator, CrossingPedestrianAvoided) {
  // Corridor 3 m wide; an NPC walks across the robot's path.
  auto g = oracle::shared_grid(oracle::room(64, 14, 0.25));
  auto npc = make(2, AgentKind::npc, {7, 0.7, 0});
  npc.goal = {7, 2.8, 0};
  world::World w(g, {}, {make(0, AgentKind::avatar, {15, 2.9, 0}), make(1, AgentKind::robot, {1.5, 1.75, 0}, 0.25), npc});
  RobotNavigator nav(g, {}, {14, 1.75, 0});
  int robot_collisions = 0;
  bool reached = false;
  double min_speed_near = 1e9;
  for (int i = 0; i < 1200 && !reached; ++i) {
    const auto r = nav.tick(w.state().agents, 1, w.sim_time());
    for (const auto& e : r.events) reached = reached || e.kind == NavEventKind::goal_reached;
    const auto* robot = w.state().find(1);
    const auto* person = w.state().find(2);
    if (distance(robot->pose.position(), person->pose.position()) < 2.0)
      min_speed_near = std::min(min_speed_near, r.command.linear);
    for (const auto& e : w.step(0.05, {}, r.command))
      if (e.kind == world::EventKind::collision_start && (e.agent == 1 || e.other == 1)) ++robot_collisions;
  }
  EXPECT_TRUE(reached);
  EXPECT_EQ(robot_collisions, 0);
  EXPECT_LT(min_speed_near, NavConfig{}.control.v_max);
}

TEST(Navigator, PathDeterministicOnLab) {
  auto lab = oracle::shared_grid(OccupancyGrid::load(std::string(CROWDNAV_ASSET_DIR) + "/maps/lab.yaml"));
  auto once = [&] {
    RobotNavigator nav(lab, {}, {1, 4.5, 0});
    const std::vector<AgentState> agents{make(1, AgentKind::robot, {11, 4, 3.14159}, 0.25)};
    nav.tick(agents, 1, 0.0);
    return nav.path().cells;
  };
  EXPECT_EQ(once(), once());
}
