#include "crowdnav/nav/local_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crowdnav::nav {

namespace {

double segment_distance(Vec2 p, Vec2 a, Vec2 b, double* t_out = nullptr) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  if (t_out) *t_out = t;
  return distance(p, a + ab * t);
}

}  // namespace

std::vector<Pose2D> simulate_rollout(Pose2D start, RobotCommand cmd, double horizon, double step) {
  const int steps = static_cast<int>(std::lround(horizon / step));
  std::vector<Pose2D> poses;
  poses.reserve(static_cast<std::size_t>(steps) + 1);
  poses.push_back(start);
  Pose2D p = start;
  for (int i = 0; i < steps; ++i) {
    p.theta = normalize_angle(p.theta + cmd.angular * step);
    p.x += cmd.linear * std::cos(p.theta) * step;
    p.y += cmd.linear * std::sin(p.theta) * step;
    poses.push_back(p);
  }
  return poses;
}

double distance_to_polyline(Vec2 p, const std::vector<Vec2>& points) {
  if (points.empty()) return std::numeric_limits<double>::infinity();
  if (points.size() == 1) return distance(p, points.front());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points.size(); ++i) best = std::min(best, segment_distance(p, points[i], points[i + 1]));
  return best;
}

std::vector<Vec2> path_window(const PlanPath& path, Vec2 robot, double window, double lead) {
  const auto& wps = path.waypoints;
  if (wps.empty()) return {};
  if (wps.size() == 1) return {wps.front().position()};

  std::size_t best_seg = 0;
  double best_t = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
    double t = 0.0;
    const double d = segment_distance(robot, wps[i].position(), wps[i + 1].position(), &t);
    if (d < best_d) {
      best_d = d;
      best_seg = i;
      best_t = t;
    }
  }
  const Vec2 a = wps[best_seg].position();
  const Vec2 b = wps[best_seg + 1].position();
  Vec2 from = a + (b - a) * best_t;
  std::size_t next_i = best_seg + 1;
  for (double skip = lead; skip > 0.0 && next_i < wps.size(); ++next_i) {
    const Vec2 next = wps[next_i].position();
    const double seg = distance(from, next);
    if (seg > skip) {
      from = from + (next - from) * (skip / seg);
      break;
    }
    skip -= seg;
    from = next;
  }
  std::vector<Vec2> out{from};
  double remaining = window;
  for (std::size_t i = next_i; i < wps.size() && remaining > 0.0; ++i) {
    const Vec2 next = wps[i].position();
    const double seg = distance(out.back(), next);
    if (seg > remaining) {
      out.push_back(out.back() + (next - out.back()) * (remaining / seg));
      break;
    }
    remaining -= seg;
    out.push_back(next);
  }
  return out;
}

std::vector<ScoredCommand> score_commands(Pose2D pose, const PlanPath& path, const Costmap& costmap,
                                          const LocalControlParams& params) {
  if (path.empty()) throw std::invalid_argument("local_control: empty path");
  const OccupancyGrid& grid = costmap.grid();
  // The window starts one horizon of travel ahead so the path term also rewards progress.
  const std::vector<Vec2> ahead = path_window(path, pose.position(), params.path_window, params.v_max * params.horizon);
  const Vec2 carrot = ahead.back();
  const CellIndex start_cell = grid.cell_of(pose.position());
  const bool start_lethal = costmap.lethal(start_cell);
  const double start_clearance = costmap.distance_to_obstacle(start_cell);

  std::vector<ScoredCommand> out;
  out.reserve(static_cast<std::size_t>(params.linear_samples * params.angular_samples));
  for (int i = 0; i < params.linear_samples; ++i) {
    const double v = params.linear_samples > 1 ? params.v_max * (static_cast<double>(i) / (params.linear_samples - 1)) : params.v_max;
    for (int j = 0; j < params.angular_samples; ++j) {
      const double w = params.angular_samples > 1
                           ? params.w_max * (2.0 * j / (params.angular_samples - 1) - 1.0)
                           : 0.0;
      ScoredCommand sc;
      sc.command = {v, w};
      const auto poses = simulate_rollout(pose, sc.command, params.horizon, params.step);
      double max_cost = 0.0;
      bool admissible = true;
      // Every cell the rollout polyline crosses, not only the sampled poses.
      for (std::size_t k = 0; admissible && k + 1 < poses.size(); ++k) {
        for (const CellIndex c : grid.segment_cells(poses[k].position(), poses[k + 1].position())) {
          const double cost = costmap.cost(c);
          if (cost >= kLethalCost) {
            // Escaping from an already-lethal cell is allowed while clearance does not shrink.
            if (!start_lethal || !grid.in_bounds(c) || grid.occupied(c) ||
                costmap.distance_to_obstacle(c) < start_clearance) {
              admissible = false;
              break;
            }
            continue;
          }
          max_cost = std::max(max_cost, cost);
        }
      }
      sc.admissible = admissible;
      if (admissible) {
        const Pose2D end = poses.back();
        const Vec2 to = carrot - end.position();
        sc.heading_error = to.norm() < 1e-9 ? 0.0 : std::abs(normalize_angle(std::atan2(to.y, to.x) - end.theta));
        // Path distance in cells, as in grid-based DWA scoring.
        sc.score = params.w_path * distance_to_polyline(end.position(), ahead) / grid.resolution() +
                   params.w_cost * max_cost + params.w_speed * (params.v_max - v);
      }
      out.push_back(sc);
    }
  }
  return out;
}

RobotCommand local_control(Pose2D pose, const PlanPath& path, const Costmap& costmap,
                           const LocalControlParams& params) {
  const auto scored = score_commands(pose, path, costmap, params);
  const ScoredCommand* best = nullptr;
  for (const auto& sc : scored)
    if (sc.admissible &&
        (!best || sc.score < best->score || (sc.score == best->score && sc.heading_error < best->heading_error)))
      best = &sc;
  if (best) return best->command;

  // Every rollout rejected: turn in place toward the path ahead.
  const auto ahead = path_window(path, pose.position(), params.path_window, params.v_max * params.horizon);
  const Vec2 target = ahead.back();
  const Vec2 to = target - pose.position();
  if (to.norm() < 1e-9) return {0.0, 0.0};
  const double err = normalize_angle(std::atan2(to.y, to.x) - pose.theta);
  if (std::abs(err) < 1e-3) return {0.0, 0.0};
  return {0.0, err > 0 ? params.w_max : -params.w_max};
}

}  // namespace crowdnav::nav
