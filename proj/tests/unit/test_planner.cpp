#include <gtest/gtest.h>

#include <random>

#include "crowdnav/nav/navigator.hpp"
#include "crowdnav/nav/planner.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;
using namespace crowdnav::nav;

namespace {

// Uniform-cost costmap: only occupied cells are lethal.
Costmap uniform(std::shared_ptr<const OccupancyGrid> g) { return Costmap(std::move(g), {0.0, 0.0, 1.0}); }

void check_path_shape(const Costmap& cm, const PlanPath& path) {
  const auto& cells = path.cells;
  ASSERT_FALSE(cells.empty());
  double len = 0.0, cost = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EXPECT_FALSE(cm.lethal(cells[i]) && i > 0);
    EXPECT_EQ(cm.grid().cell_of(path.waypoints[i].position()), cells[i]);
    if (i == 0) continue;
    const int dr = std::abs(cells[i].row - cells[i - 1].row), dc = std::abs(cells[i].col - cells[i - 1].col);
    EXPECT_LE(std::max(dr, dc), 1);
    EXPECT_GT(dr + dc, 0);
    const double step = distance(path.waypoints[i].position(), path.waypoints[i - 1].position());
    len += step;
    cost += edge_cost(step, cm.cost(cells[i]));
  }
  EXPECT_NEAR(path.total_length, len, 1e-9);
  EXPECT_NEAR(path.cost, cost, 1e-9);
}

}  // namespace

TEST(Planner, StraightLineInEmptyRoom) {
  auto g = oracle::shared_grid(oracle::room(10, 10, 1.0));
  const auto cm = uniform(g);
  const auto path = plan_global(cm, {1.5, 1.5, 0}, {1.5, 8.5, 0});
  EXPECT_DOUBLE_EQ(path.total_length, 7.0);
  EXPECT_EQ(path.cells.size(), 8u);
  for (const auto& c : path.cells) EXPECT_EQ(c.col, 1);
  check_path_shape(cm, path);
}

TEST(Planner, LethalGoalIsUnreachable) {
  auto g = oracle::shared_grid(oracle::room(10, 10, 1.0));
  const auto cm = uniform(g);
  EXPECT_THROW(plan_global(cm, {1.5, 1.5, 0}, {0.5, 5.5, 0}), UnreachableError);
  EXPECT_THROW(plan_global(cm, {1.5, 1.5, 0}, {50, 5, 0}), UnreachableError);
}

TEST(Planner, CutOffGoalReportsExploredRegion) {
  auto g = oracle::room(10, 10, 1.0);
  for (int r = 0; r < 10; ++r) g.set({r, 5}, Cell::occupied);
  const auto cm = uniform(oracle::shared_grid(g));
  try {
    plan_global(cm, {1.5, 1.5, 0}, {8.5, 8.5, 0});
    FAIL() << "expected UnreachableError";
  } catch (const UnreachableError& e) {
    EXPECT_EQ(e.explored(), 4u * 8u);  // the whole left pocket
  }
}

TEST(Planner, NoCornerCutting) {
  auto g = oracle::room(6, 6, 1.0);
  g.set({2, 2}, Cell::occupied);
  const auto cm = uniform(oracle::shared_grid(g));
  const auto path = plan_global(cm, {2.5, 1.5, 0}, {1.5, 2.5, 0});
  // The diagonal (1,2)->(2,1) would clip the occupied corner cell.
  EXPECT_EQ(path.cells.size(), 3u);
}

TEST(Planner, MatchesDijkstraOnRandomGridworlds) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = oracle::room(20, 20, 0.25);
    for (int k = 0; k < 60; ++k)
      g.set({1 + static_cast<int>(rng() % 18), 1 + static_cast<int>(rng() % 18)}, Cell::occupied);
    auto shared = oracle::shared_grid(g);
    Costmap cm(shared, {0.2, 0.8, 3.0});
    std::vector<CellIndex> free;
    for (int r = 0; r < 20; ++r)
      for (int c = 0; c < 20; ++c)
        if (!cm.lethal({r, c})) free.push_back({r, c});
    if (free.size() < 2) continue;
    const CellIndex s = free[rng() % free.size()], t = free[rng() % free.size()];
    const double oracle_cost = oracle::dijkstra_cost(cm.combined(), 20, 20, 0.25, s, t);
    if (std::isinf(oracle_cost)) {
      EXPECT_THROW(plan_global(cm, Pose2D::at(g.center_of(s)), Pose2D::at(g.center_of(t))), UnreachableError);
      continue;
    }
    const auto path = plan_global(cm, Pose2D::at(g.center_of(s)), Pose2D::at(g.center_of(t)));
    EXPECT_NEAR(path.cost, oracle_cost, 1e-9) << "trial " << trial;
    check_path_shape(cm, path);
  }
}

TEST(Planner, Deterministic) {
  auto lab = oracle::shared_grid(OccupancyGrid::load(std::string(CROWDNAV_ASSET_DIR) + "/maps/lab.yaml"));
  NavConfig cfg;
  Costmap cm(lab, cfg.inflation_for(*lab));
  const auto a = plan_global(cm, {11, 4, 0}, {1, 4.5, 0});
  const auto b = plan_global(cm, {11, 4, 0}, {1, 4.5, 0});
  EXPECT_EQ(a.cells, b.cells);
  EXPECT_EQ(a.cost, b.cost);
}

TEST(Planner, CornerPointsKeepTurnsAndEnd) {
  auto g = oracle::room(10, 10, 1.0);
  const auto cm = uniform(oracle::shared_grid(g));
  const auto path = plan_global(cm, {1.5, 1.5, 0}, {8.5, 1.5, 0});
  const auto corners = corner_points(path);
  ASSERT_EQ(corners.size(), 1u);
  EXPECT_EQ(corners.back(), (Vec2{8.5, 1.5}));
}

TEST(PedestrianRouter, RoutesAroundWallsAndEndsOnTarget) {
  auto g = oracle::room(20, 20, 0.5);
  for (int r = 0; r < 15; ++r) g.set({r, 10}, Cell::occupied);
  PedestrianRouter router(oracle::shared_grid(g), 0.3);
  const auto route = router.route({2.2, 2.1}, {8.3, 2.2});
  ASSERT_GE(route.size(), 2u);
  EXPECT_EQ(route.back(), (Vec2{8.3, 2.2}));
  bool above = false;
  for (const auto& p : route) above = above || p.y > 7.5;
  EXPECT_TRUE(above);
  EXPECT_TRUE(router.route({2, 2}, {0.2, 0.2}).empty());
}
