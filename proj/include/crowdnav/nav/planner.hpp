#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/grid.hpp"
#include "crowdnav/nav/costmap.hpp"

namespace crowdnav::nav {

struct PlanPath {
  std::vector<Pose2D> waypoints;  // grid-adjacent cell centres
  std::vector<CellIndex> cells;
  double total_length = 0.0;      // metres
  double cost = 0.0;              // sum of edge costs

  bool empty() const { return waypoints.empty(); }
};

/// No path between start and goal; carries how many cells were expanded.
class UnreachableError : public std::runtime_error {
 public:
  UnreachableError(const std::string& what, std::size_t explored)
      : std::runtime_error(what), explored_(explored) {}
  std::size_t explored() const { return explored_; }

 private:
  std::size_t explored_;
};

/// Edge cost of a move of `step_length` metres into a cell of cost `cost`.
inline double edge_cost(double step_length, double cost) { return step_length * (1.0 + cost / 128.0); }

/// Read-only view of a combined cost grid for the search.
struct CostView {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  std::span<const double> costs;

  bool in_bounds(CellIndex c) const { return c.row >= 0 && c.col >= 0 && c.row < height && c.col < width; }
  double at(CellIndex c) const { return costs[static_cast<std::size_t>(c.row * width + c.col)]; }
  bool lethal(CellIndex c) const { return !in_bounds(c) || at(c) >= kLethalCost; }
};

struct OpenEntry {
  double f;
  int row;
  int col;
};

/// Scratch buffers reused across searches.
struct PlannerWorkspace {
  std::vector<double> g;
  std::vector<std::int32_t> parent;
  std::vector<std::uint8_t> closed;
  std::vector<OpenEntry> open;
};

struct CellPath {
  std::vector<CellIndex> cells;
  double cost = 0.0;
  std::size_t explored = 0;
  bool found = false;
};

/// A* over the 8-connected grid. Diagonal moves are disallowed when either
/// adjacent orthogonal cell is lethal. The start cell may be lethal; the goal
/// may not. Equal-priority entries are expanded in (row, col) order.
CellPath search_cells(const CostView& view, CellIndex start, CellIndex goal, PlannerWorkspace& ws);

/// Minimum-cost path between two poses on the costmap.
/// Throws UnreachableError when the goal is lethal, outside the map, or cut off.
PlanPath plan_global(const Costmap& costmap, Pose2D start, Pose2D goal);

/// Keeps only the points where the path changes direction, plus the end.
std::vector<Vec2> corner_points(const PlanPath& path);

}  // namespace crowdnav::nav
