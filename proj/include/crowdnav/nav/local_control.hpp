#pragma once

#include <vector>

#include "crowdnav/agent.hpp"
#include "crowdnav/nav/costmap.hpp"
#include "crowdnav/nav/planner.hpp"

namespace crowdnav::nav {

/// Arc-sampling local controller settings. Commands are drawn from a fixed
/// lattice of linear x angular velocities and each is rolled out for
/// `horizon` seconds.
struct LocalControlParams {
  double v_max = 0.8;
  double w_max = 1.5;
  int linear_samples = 7;
  int angular_samples = 15;
  double horizon = 1.0;
  double step = 0.05;
  double w_path = 1.0;
  double w_cost = 0.02;
  double w_speed = 0.5;
  double path_window = 2.0;  // metres of path ahead scored against
};

/// Poses visited by a constant command, including the start pose. Uses the
/// same update as the world (heading first, then translation).
std::vector<Pose2D> simulate_rollout(Pose2D start, RobotCommand cmd, double horizon, double step);

/// Distance from `p` to the polyline formed by `points`.
double distance_to_polyline(Vec2 p, const std::vector<Vec2>& points);

/// The part of `path` ahead of the robot: from its projection onto the path,
/// skipping `lead` metres, forward for `window` metres. Both are clipped at
/// the path end, so near the goal the window collapses to the last waypoint.
std::vector<Vec2> path_window(const PlanPath& path, Vec2 robot, double window, double lead = 0.0);

struct ScoredCommand {
  RobotCommand command;
  double score = 0.0;
  double heading_error = 0.0;  // |bearing to the window end - final heading|, breaks ties
  bool admissible = false;
};

/// Scores every lattice command; exposed for inspection and tests.
std::vector<ScoredCommand> score_commands(Pose2D pose, const PlanPath& path, const Costmap& costmap,
                                          const LocalControlParams& params);

/// Lowest-score admissible command, or a rotate-in-place fallback toward
/// the path when every rollout is rejected.
RobotCommand local_control(Pose2D pose, const PlanPath& path, const Costmap& costmap,
                           const LocalControlParams& params);

}  // namespace crowdnav::nav
