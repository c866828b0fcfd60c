#include "crowdnav/nav/navigator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdnav::nav {

RobotNavigator::RobotNavigator(std::shared_ptr<const OccupancyGrid> grid, NavConfig config, Pose2D goal)
    : config_(config), costmap_(grid, config.inflation_for(*grid)), goal_(goal) {}

bool RobotNavigator::path_blocked() const {
  for (std::size_t i = 1; i < path_.cells.size(); ++i)
    if (costmap_.lethal(path_.cells[i])) return true;
  return false;
}

NavTickResult RobotNavigator::tick(std::span<const AgentState> agents, int robot_id, double sim_time) {
  NavTickResult result;
  const AgentState* robot = nullptr;
  for (const auto& a : agents)
    if (a.id == robot_id) robot = &a;
  if (!robot) throw std::invalid_argument("RobotNavigator::tick: robot not in agent list");

  if (goal_reached_) return result;
  if (distance(robot->pose.position(), goal_.position()) <= config_.goal_tolerance) {
    goal_reached_ = true;
    result.events.push_back({NavEventKind::goal_reached, sim_time, 0});
    return result;
  }

  const double padding = config_.robot_radius + 0.5 * costmap_.grid().resolution();
  costmap_.set_social_layer(social_layer(costmap_.grid(), agents, config_.social));
  costmap_.set_agent_obstacles(agents, padding);

  const double since = last_plan_time_ ? sim_time - *last_plan_time_ : 1e9;
  const bool due = since >= config_.replan_period - 1e-9;
  const bool blocked = since >= config_.blocked_replan_period - 1e-9 && path_blocked();
  if (due || blocked || (path_.empty() && since >= config_.blocked_replan_period - 1e-9)) {
    last_plan_time_ = sim_time;
    // Plan around people through the soft social layer only; a person near the
    // goal must not make it unreachable.
    costmap_.clear_agent_obstacles();
    try {
      path_ = plan_global(costmap_, robot->pose, goal_);
      failed_ = false;
      result.events.push_back({NavEventKind::replanned, sim_time, 0});
    } catch (const UnreachableError& e) {
      path_ = {};
      if (!failed_) result.events.push_back({NavEventKind::nav_failed, sim_time, e.explored()});
      failed_ = true;
    }
  }
  if (path_.empty()) return result;

  costmap_.set_agent_obstacles(agents, padding);
  // Track the exact goal rather than its cell centre.
  PlanPath track = path_;
  track.waypoints.back() = goal_;
  result.command = local_control(robot->pose, track, costmap_, config_.control);
  return result;
}

PedestrianRouter::PedestrianRouter(std::shared_ptr<const OccupancyGrid> grid, double radius)
    : costmap_(grid, InflationParams{radius + 0.5 * grid->resolution(), radius + grid->resolution(), 4.0}) {}

std::optional<PlanPath> PedestrianRouter::plan(Vec2 from, Vec2 to) const {
  try {
    return plan_global(costmap_, Pose2D::at(from), Pose2D::at(to));
  } catch (const UnreachableError&) {
    return std::nullopt;
  }
}

std::vector<Vec2> PedestrianRouter::route(Vec2 from, Vec2 to) const {
  const auto path = plan(from, to);
  if (!path) return {};
  auto corners = corner_points(*path);
  // Finish on the exact target rather than its cell centre.
  if (!corners.empty()) corners.back() = to;
  return corners;
}

}  // namespace crowdnav::nav
