#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "crowdnav/agent.hpp"
#include "crowdnav/grid.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;

TEST(Geometry, NormalizeAngleRange) {
  EXPECT_DOUBLE_EQ(normalize_angle(std::numbers::pi), std::numbers::pi);
  EXPECT_DOUBLE_EQ(normalize_angle(-std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(normalize_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(normalize_angle(-0.5 - 4 * std::numbers::pi), -0.5, 1e-12);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 1000; ++i) {
    const double a = normalize_angle(u(rng));
    EXPECT_GT(a, -std::numbers::pi);
    EXPECT_LE(a, std::numbers::pi);
  }
}

TEST(Geometry, PoseMakeNormalizes) {
  const Pose2D p = Pose2D::make(1, 2, 7.0);
  EXPECT_NEAR(p.theta, 7.0 - 2 * std::numbers::pi, 1e-12);
}

TEST(AvatarCommand, KeysRoundTripAndDirection) {
  EXPECT_EQ(AvatarCommand::from_keys("wd").keys(), "WD");
  EXPECT_EQ(AvatarCommand::from_keys("WS").direction(), Vec2{});
  EXPECT_EQ(AvatarCommand::from_keys("AD").direction(), Vec2{});
  EXPECT_EQ(AvatarCommand::from_keys("W").direction(), (Vec2{0, 1}));
  EXPECT_EQ(AvatarCommand::from_keys("A").direction(), (Vec2{-1, 0}));
  const Vec2 diag = AvatarCommand::from_keys("WD").direction();
  EXPECT_NEAR(diag.norm(), 1.0, 1e-15);
  EXPECT_NEAR(std::atan2(diag.y, diag.x), std::numbers::pi / 4, 1e-15);
  EXPECT_EQ(AvatarCommand::from_keys("WSD").direction(), (Vec2{1, 0}));
  EXPECT_FALSE(AvatarCommand{}.any());
}

TEST(AgentKind, ParseRoundTrip) {
  for (auto k : {AgentKind::avatar, AgentKind::npc, AgentKind::robot})
    EXPECT_EQ(parse_agent_kind(to_string(k)), k);
  EXPECT_FALSE(parse_agent_kind("cat"));
}

TEST(CoincidentDirection, AntisymmetricUnitAndDeterministic) {
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      if (i == j) continue;
      const Vec2 a = coincident_direction(i, j), b = coincident_direction(j, i);
      EXPECT_NEAR(a.norm(), 1.0, 1e-12);
      EXPECT_EQ(a, -b);
      EXPECT_EQ(a, coincident_direction(i, j));
    }
  EXPECT_EQ(pair_hash(3, 9), pair_hash(9, 3));
}

TEST(Grid, DimensionsChecked) {
  EXPECT_THROW(OccupancyGrid(0, 3, 1.0, {}, {}), MapError);
  EXPECT_THROW(OccupancyGrid(2, 2, 0.0, {}, std::vector<Cell>(4)), MapError);
  EXPECT_THROW(OccupancyGrid(2, 2, 1.0, {}, std::vector<Cell>(3)), MapError);
  EXPECT_THROW(OccupancyGrid::from_rows({"##", "#"}, 1.0), MapError);
  EXPECT_THROW(OccupancyGrid::from_rows({}, 1.0), MapError);
}

TEST(Grid, RowsAreTopFirst) {
  const auto g = OccupancyGrid::from_rows({"#..", "..."}, 1.0);
  EXPECT_TRUE(g.occupied({1, 0}));
  EXPECT_FALSE(g.occupied({0, 0}));
  EXPECT_EQ(g.cell_of({0.5, 1.5}), (CellIndex{1, 0}));
  EXPECT_TRUE(g.occupied({-1, 0}));
  EXPECT_TRUE(g.occupied({0, 3}));
}

TEST(Grid, CellCentreRoundTrip) {
  const OccupancyGrid g = oracle::room(10, 8, 0.25, {-1.0, 2.0});
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 10; ++c) EXPECT_EQ(g.cell_of(g.center_of({r, c})), (CellIndex{r, c}));
  EXPECT_TRUE(g.is_closed());
  EXPECT_FALSE(OccupancyGrid::from_rows({"###", "#..", "###"}, 1.0).is_closed());
}

TEST(Grid, DiscHitsObstacle) {
  const OccupancyGrid g = oracle::room(10, 10, 1.0);
  EXPECT_FALSE(g.disc_hits_obstacle({5, 5}, 0.5));
  EXPECT_FALSE(g.disc_hits_obstacle({1.5, 5}, 0.5));  // touching the wall face
  EXPECT_TRUE(g.disc_hits_obstacle({1.45, 5}, 0.5));
  EXPECT_TRUE(g.disc_hits_obstacle({1.3, 1.3}, 0.45));
  EXPECT_FALSE(g.disc_hits_obstacle({1.4, 1.4}, 0.35));
}

TEST(Grid, NearestObstaclePoint) {
  const OccupancyGrid g = oracle::room(10, 10, 1.0);
  Vec2 q;
  ASSERT_TRUE(g.nearest_obstacle_point({1.7, 5.2}, 2.0, q));
  EXPECT_NEAR(q.x, 1.0, 1e-12);
  EXPECT_NEAR(q.y, 5.2, 1e-12);
  EXPECT_FALSE(g.nearest_obstacle_point({5, 5}, 2.0, q));
}

TEST(Grid, RaycastEmptyRoomHitsWall) {
  // 10x10 m interior, origin at the centre.
  const OccupancyGrid g = oracle::room(12, 12, 1.0, {-6, -6});
  const double d = g.raycast({0, 0}, {1, 0}, 20.0);
  EXPECT_NEAR(d, 5.0, 1.0);
  EXPECT_DOUBLE_EQ(g.raycast({0, 0}, {1, 0}, 3.0), 3.0);
  EXPECT_EQ(g.raycast({-5.5, -5.5}, {1, 0}, 3.0), 0.0);
}

TEST(Grid, RaycastMatchesExhaustiveOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    OccupancyGrid g = oracle::room(30, 30, 0.2);
    for (int k = 0; k < 60; ++k)
      g.set({1 + static_cast<int>(rng() % 28), 1 + static_cast<int>(rng() % 28)}, Cell::occupied);
    Vec2 o;
    do o = {0.2 + (rng() % 1000) / 1000.0 * 5.6, 0.2 + (rng() % 1000) / 1000.0 * 5.6};
    while (g.occupied(g.cell_of(o)));
    for (int k = 0; k < 36; ++k) {
      const Vec2 dir = unit_from_angle(2 * std::numbers::pi * k / 36 + 0.01);
      const double step = g.resolution() / 4;
      const double fast = g.raycast(o, dir, 8.0);
      EXPECT_NEAR(fast, oracle::ray_boxes(g, o, dir, 8.0), 1e-9) << "trial " << trial << " beam " << k;
      // The fixed-step march never sees an obstacle the traversal missed.
      EXPECT_LE(fast, oracle::ray_march(g, {}, o, dir, 8.0, step) + 1e-9);
    }
  }
}

TEST(Grid, LineOfSight) {
  auto g = oracle::room(10, 10, 1.0);
  EXPECT_TRUE(g.line_of_sight({2, 2}, {8, 8}));
  g.set({5, 5}, Cell::occupied);
  EXPECT_FALSE(g.line_of_sight({2, 2}, {8, 8}));
  EXPECT_TRUE(g.line_of_sight({2, 2}, {2, 8}));
  EXPECT_FALSE(g.line_of_sight({0.5, 0.5}, {2, 2}));
}

TEST(Grid, LoadScalesCharacters) {
  const auto dir = oracle::scratch_dir("map");
  {
    std::ofstream out(dir / "m.yaml");
    out << "schema: crowdnav.map/1\nresolution: 0.25\nchar_size: 0.5\norigin: [1.0, 2.0]\nrows: |\n  ###\n  #.#\n  ###\n";
  }
  const auto g = OccupancyGrid::load(dir / "m.yaml");
  EXPECT_EQ(g.width(), 6);
  EXPECT_EQ(g.height(), 6);
  EXPECT_DOUBLE_EQ(g.resolution(), 0.25);
  EXPECT_EQ(g.origin(), (Vec2{1.0, 2.0}));
  EXPECT_FALSE(g.occupied({2, 2}));
  EXPECT_FALSE(g.occupied({3, 3}));
  EXPECT_TRUE(g.occupied({1, 2}));
  {
    std::ofstream out(dir / "bad.yaml");
    out << "schema: crowdnav.map/1\nresolution: 0.25\nchar_size: 0.3\nrows: |\n  #\n";
  }
  EXPECT_THROW(OccupancyGrid::load(dir / "bad.yaml"), MapError);
  {
    std::ofstream out(dir / "noschema.yaml");
    out << "resolution: 0.25\nrows: |\n  #\n";
  }
  EXPECT_THROW(OccupancyGrid::load(dir / "noschema.yaml"), MapError);
  EXPECT_THROW(OccupancyGrid::load(dir / "missing.yaml"), MapError);
  std::filesystem::remove_all(dir);
}

TEST(Grid, SegmentCellsCoverFineSamples) {
  const auto g = oracle::room(20, 20, 0.25);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 4.9), step(-0.6, 0.6);
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec2 a{u(rng), u(rng)};
    const Vec2 b = trial % 10 == 0 ? a : Vec2{a.x + step(rng), a.y + step(rng)};
    const auto cells = g.segment_cells(a, b);
    ASSERT_FALSE(cells.empty());
    EXPECT_EQ(cells.front(), g.cell_of(a));
    EXPECT_EQ(cells.back(), g.cell_of(b));
    for (std::size_t i = 1; i < cells.size(); ++i)
      EXPECT_EQ(std::abs(cells[i].row - cells[i - 1].row) + std::abs(cells[i].col - cells[i - 1].col), 1);
    const std::set<CellIndex> seen(cells.begin(), cells.end());
    for (int k = 0; k <= 2000; ++k) {
      const CellIndex c = g.cell_of(a + (b - a) * (k / 2000.0));
      EXPECT_TRUE(seen.count(c)) << "trial " << trial << " sample " << k;
    }
  }
}
