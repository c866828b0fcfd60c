#include "crowdnav/world/social_force.hpp"

#include <cmath>

namespace crowdnav::world {

Vec2 goal_term(const AgentState& self, Vec2 waypoint, const SocialForceParams& params) {
  const Vec2 to_wp = waypoint - self.pose.position();
  const double dist = to_wp.norm();
  const Vec2 desired = dist > 1e-9 ? to_wp * (self.desired_speed / dist) : Vec2{};
  return (desired - self.velocity) / params.relaxation_time;
}

Vec2 neighbor_term(const AgentState& self, const AgentState& other, const SocialForceParams& params) {
  const Vec2 diff = self.pose.position() - other.pose.position();
  const double d = diff.norm();
  const Vec2 n = d > 0.0 ? diff / d : coincident_direction(self.id, other.id);
  const double magnitude =
      params.repulsion_strength * std::exp((self.radius + other.radius - d) / params.repulsion_range);
  return n * magnitude;
}

Vec2 obstacle_term(const AgentState& self, const OccupancyGrid& grid, const SocialForceParams& params) {
  const Vec2 p = self.pose.position();
  Vec2 q;
  if (!grid.nearest_obstacle_point(p, params.obstacle_cutoff, q)) return {};
  Vec2 diff = p - q;
  double d = diff.norm();
  if (d == 0.0) {
    // Centre inside an occupied cell: push out from the cell centre.
    diff = p - grid.center_of(grid.cell_of(p));
    const double len = diff.norm();
    diff = len > 0.0 ? diff / len : Vec2{1.0, 0.0};
  } else {
    diff = diff / d;
  }
  return diff * (params.obstacle_strength * std::exp((self.radius - d) / params.obstacle_range));
}

Vec2 social_force(const AgentState& self, std::span<const AgentState> neighbors,
                  const OccupancyGrid& grid, const SocialForceParams& params, Vec2 waypoint) {
  Vec2 force = goal_term(self, waypoint, params);
  force += obstacle_term(self, grid, params);
  for (const auto& other : neighbors) {
    if (other.id == self.id) continue;
    force += neighbor_term(self, other, params);
  }
  return force;
}

}  // namespace crowdnav::world
