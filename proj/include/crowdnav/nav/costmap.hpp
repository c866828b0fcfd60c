#pragma once

#include <memory>
#include <span>
#include <vector>

#include "crowdnav/agent.hpp"
#include "crowdnav/grid.hpp"

namespace crowdnav::nav {

inline constexpr double kLethalCost = 255.0;
inline constexpr double kInscribedCost = 254.0;

struct InflationParams {
  double lethal_radius = 0.25;     // cells closer than this to an obstacle are lethal
  double inflation_radius = 1.0;   // cost drops to 0 beyond this distance
  double decay = 3.0;              // 1/m
};

struct SocialLayerParams {
  double peak = 200.0;
  double sigma = 0.8;           // m
  double cutoff_sigmas = 4.0;   // bump is 0 beyond cutoff_sigmas * sigma
};

/// Euclidean distance in metres from every cell centre to the nearest
/// occupied cell centre (exact two-pass distance transform). Infinity when
/// the grid has no occupied cell.
std::vector<double> obstacle_distance(const OccupancyGrid& grid);

/// Inflation cost for a cell at `d` metres from the nearest obstacle.
double inflation_cost(double d, const InflationParams& params);

/// Inflation layer over the whole grid.
std::vector<double> inflate(const OccupancyGrid& grid, const InflationParams& params);

/// Gaussian cost bumps on every avatar or NPC (robots are skipped); where
/// bumps overlap the larger one wins.
std::vector<double> social_layer(const OccupancyGrid& grid, std::span<const AgentState> agents,
                                 const SocialLayerParams& params = {});

/// Layered costmap: static, inflation and social layers combined by max.
class Costmap {
 public:
  Costmap(std::shared_ptr<const OccupancyGrid> grid, const InflationParams& params);

  void set_social_layer(std::vector<double> layer);
  void clear_social_layer();

  /// Marks every cell whose centre lies within an avatar's or NPC's radius
  /// plus `padding` as lethal, as a sensed body would appear to the robot.
  void set_agent_obstacles(std::span<const AgentState> agents, double padding);
  void clear_agent_obstacles();

  const OccupancyGrid& grid() const { return *grid_; }
  const std::shared_ptr<const OccupancyGrid>& grid_ptr() const { return grid_; }
  const InflationParams& inflation_params() const { return params_; }

  /// Combined cost; cells outside the grid are lethal.
  double cost(CellIndex c) const {
    return grid_->in_bounds(c) ? combined_[grid_->flat(c)] : kLethalCost;
  }
  bool lethal(CellIndex c) const { return cost(c) >= kLethalCost; }
  double distance_to_obstacle(CellIndex c) const {
    return grid_->in_bounds(c) ? distance_[grid_->flat(c)] : 0.0;
  }

  const std::vector<double>& combined() const { return combined_; }
  const std::vector<double>& static_layer() const { return static_; }
  const std::vector<double>& inflation_layer() const { return inflation_; }
  const std::vector<double>& social() const { return social_; }
  const std::vector<double>& agent_layer() const { return agents_; }

 private:
  void recombine();

  std::shared_ptr<const OccupancyGrid> grid_;
  InflationParams params_;
  std::vector<double> distance_;
  std::vector<double> static_;
  std::vector<double> inflation_;
  std::vector<double> social_;
  std::vector<double> agents_;
  std::vector<double> combined_;
};

}  // namespace crowdnav::nav
