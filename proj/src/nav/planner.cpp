#include "crowdnav/nav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace crowdnav::nav {

namespace {

struct Move {
  int dr;
  int dc;
  bool diagonal;
};

constexpr Move kMoves[8] = {{-1, -1, true}, {-1, 0, false}, {-1, 1, true}, {0, -1, false},
                            {0, 1, false},  {1, -1, true},  {1, 0, false}, {1, 1, true}};

double octile(CellIndex a, CellIndex b, double res) {
  const double dr = std::abs(a.row - b.row);
  const double dc = std::abs(a.col - b.col);
  return res * ((std::numbers::sqrt2 - 1.0) * std::min(dr, dc) + std::max(dr, dc));
}

// Min-heap order on (f, row, col).
bool heap_after(const OpenEntry& a, const OpenEntry& b) {
  return std::tie(a.f, a.row, a.col) > std::tie(b.f, b.row, b.col);
}

}  // namespace

CellPath search_cells(const CostView& view, CellIndex start, CellIndex goal, PlannerWorkspace& ws) {
  CellPath out;
  if (!view.in_bounds(start) || view.lethal(goal)) return out;

  const std::size_t n = static_cast<std::size_t>(view.width) * static_cast<std::size_t>(view.height);
  ws.g.assign(n, std::numeric_limits<double>::infinity());
  ws.parent.assign(n, -1);
  ws.closed.assign(n, 0);
  auto flat = [&](CellIndex c) { return static_cast<std::size_t>(c.row * view.width + c.col); };

  const double diag = view.resolution * std::numbers::sqrt2;
  auto& open = ws.open;
  open.clear();
  ws.g[flat(start)] = 0.0;
  open.push_back({octile(start, goal, view.resolution), start.row, start.col});

  while (!open.empty()) {
    std::pop_heap(open.begin(), open.end(), heap_after);
    const OpenEntry top = open.back();
    open.pop_back();
    const CellIndex cur{top.row, top.col};
    const std::size_t ci = flat(cur);
    if (ws.closed[ci]) continue;
    ws.closed[ci] = 1;
    ++out.explored;
    if (cur == goal) break;

    for (const Move& m : kMoves) {
      const CellIndex nb{cur.row + m.dr, cur.col + m.dc};
      if (view.lethal(nb)) continue;
      if (m.diagonal && (view.lethal({cur.row + m.dr, cur.col}) || view.lethal({cur.row, cur.col + m.dc})))
        continue;
      const std::size_t ni = flat(nb);
      if (ws.closed[ni]) continue;
      const double g = ws.g[ci] + edge_cost(m.diagonal ? diag : view.resolution, view.at(nb));
      if (g < ws.g[ni]) {
        ws.g[ni] = g;
        ws.parent[ni] = static_cast<std::int32_t>(ci);
        open.push_back({g + octile(nb, goal, view.resolution), nb.row, nb.col});
        std::push_heap(open.begin(), open.end(), heap_after);
      }
    }
  }

  const std::size_t gi = flat(goal);
  if (!ws.closed[gi]) return out;
  out.found = true;
  out.cost = ws.g[gi];
  for (std::int64_t i = static_cast<std::int64_t>(gi); i >= 0; i = ws.parent[static_cast<std::size_t>(i)])
    out.cells.push_back({static_cast<int>(i / view.width), static_cast<int>(i % view.width)});
  std::reverse(out.cells.begin(), out.cells.end());
  return out;
}

PlanPath plan_global(const Costmap& costmap, Pose2D start, Pose2D goal) {
  const OccupancyGrid& grid = costmap.grid();
  const CellIndex s = grid.cell_of(start.position());
  const CellIndex g = grid.cell_of(goal.position());
  if (!grid.in_bounds(s)) throw UnreachableError("start outside the map", 0);
  if (!grid.in_bounds(g)) throw UnreachableError("goal outside the map", 0);
  if (costmap.lethal(g)) throw UnreachableError("goal lies in a lethal cell", 0);

  const CostView view{grid.width(), grid.height(), grid.resolution(), costmap.combined()};
  PlannerWorkspace ws;
  CellPath found = search_cells(view, s, g, ws);
  if (!found.found) throw UnreachableError("no path to goal", found.explored);

  PlanPath path;
  path.cells = std::move(found.cells);
  path.cost = found.cost;
  path.waypoints.reserve(path.cells.size());
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    const Vec2 p = grid.center_of(path.cells[i]);
    double theta = goal.theta;
    if (i + 1 < path.cells.size()) {
      const Vec2 next = grid.center_of(path.cells[i + 1]);
      theta = std::atan2(next.y - p.y, next.x - p.x);
      path.total_length += distance(p, next);
    }
    path.waypoints.push_back(Pose2D::at(p, theta));
  }
  return path;
}

std::vector<Vec2> corner_points(const PlanPath& path) {
  std::vector<Vec2> out;
  const auto& cells = path.cells;
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
    const int dr0 = cells[i].row - cells[i - 1].row, dc0 = cells[i].col - cells[i - 1].col;
    const int dr1 = cells[i + 1].row - cells[i].row, dc1 = cells[i + 1].col - cells[i].col;
    if (dr0 != dr1 || dc0 != dc1) out.push_back(path.waypoints[i].position());
  }
  if (!path.waypoints.empty()) out.push_back(path.waypoints.back().position());
  return out;
}

}  // namespace crowdnav::nav
