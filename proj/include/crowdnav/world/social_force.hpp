#pragma once

#include <span>

#include "crowdnav/agent.hpp"
#include "crowdnav/grid.hpp"

namespace crowdnav::world {

/// Circular-specification social force model parameters.
struct SocialForceParams {
  double relaxation_time = 0.5;    // tau, s
  double repulsion_strength = 2.0; // A
  double repulsion_range = 0.35;   // B, m
  double obstacle_strength = 3.0;  // A_obs
  double obstacle_range = 0.2;     // B_obs, m
  double obstacle_cutoff = 2.0;    // walls further than this exert no force, m

  bool valid() const {
    return relaxation_time > 0 && repulsion_strength > 0 && repulsion_range > 0 &&
           obstacle_strength > 0 && obstacle_range > 0 && obstacle_cutoff > 0;
  }
};

/// (v_desired - v) / tau with v_desired pointing at the waypoint.
Vec2 goal_term(const AgentState& self, Vec2 waypoint, const SocialForceParams& params);

/// A * exp((r_i + r_j - d) / B) along the unit vector from `other` to `self`.
Vec2 neighbor_term(const AgentState& self, const AgentState& other, const SocialForceParams& params);

/// Repulsion from the closest point of the nearest occupied cell.
Vec2 obstacle_term(const AgentState& self, const OccupancyGrid& grid, const SocialForceParams& params);

/// Total force: goal + obstacle + sum of neighbor terms, accumulated in that
/// order. Entries of `neighbors` sharing self's id are skipped.
Vec2 social_force(const AgentState& self, std::span<const AgentState> neighbors,
                  const OccupancyGrid& grid, const SocialForceParams& params, Vec2 waypoint);

}  // namespace crowdnav::world
