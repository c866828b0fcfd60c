#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "crowdnav/agent.hpp"
#include "crowdnav/nav/costmap.hpp"
#include "crowdnav/nav/local_control.hpp"
#include "crowdnav/nav/planner.hpp"

namespace crowdnav::nav {

struct NavConfig {
  double robot_radius = 0.25;
  double inflation_radius = 1.0;
  double inflation_decay = 3.0;
  SocialLayerParams social{};
  LocalControlParams control{};
  double replan_period = 2.0;   // s
  double blocked_replan_period = 0.5;  // s, minimum gap between re-plans forced by a blocked path
  double goal_tolerance = 0.25; // m

  /// Lethal radius padded by half a cell so a robot centred in any
  /// non-lethal cell clears every occupied cell square.
  InflationParams inflation_for(const OccupancyGrid& grid) const {
    return {robot_radius + 0.5 * grid.resolution(), std::max(inflation_radius, robot_radius), inflation_decay};
  }
};

enum class NavEventKind { goal_reached, nav_failed, replanned };

struct NavEvent {
  NavEventKind kind = NavEventKind::replanned;
  double sim_time = 0.0;
  std::size_t explored = 0;  // nav_failed only
};

struct NavTickResult {
  RobotCommand command;
  std::vector<NavEvent> events;
};

/// The robot's autonomy for one session: cached static+inflation costmap,
/// social layer rebuilt every tick, global re-plan on a fixed cadence or when
/// the path becomes blocked, and the local controller every tick.
/// Localization is the ground-truth pose.
class RobotNavigator {
 public:
  RobotNavigator(std::shared_ptr<const OccupancyGrid> grid, NavConfig config, Pose2D goal);

  /// One control tick. `agents` must contain the robot (by `robot_id`).
  NavTickResult tick(std::span<const AgentState> agents, int robot_id, double sim_time);

  const PlanPath& path() const { return path_; }
  const Costmap& costmap() const { return costmap_; }
  const NavConfig& config() const { return config_; }
  bool goal_reached() const { return goal_reached_; }
  Pose2D goal() const { return goal_; }

 private:
  bool path_blocked() const;

  NavConfig config_;
  Costmap costmap_;
  Pose2D goal_;
  PlanPath path_;
  std::optional<double> last_plan_time_;
  bool goal_reached_ = false;
  bool failed_ = false;
};

/// Plans pedestrian routes (for NPCs and headless participants) on a costmap
/// inflated for a walking disc. Returns corner waypoints; an empty vector
/// when no route exists.
class PedestrianRouter {
 public:
  PedestrianRouter(std::shared_ptr<const OccupancyGrid> grid, double radius);

  std::vector<Vec2> route(Vec2 from, Vec2 to) const;
  std::optional<PlanPath> plan(Vec2 from, Vec2 to) const;
  const Costmap& costmap() const { return costmap_; }

 private:
  Costmap costmap_;
};

}  // namespace crowdnav::nav
