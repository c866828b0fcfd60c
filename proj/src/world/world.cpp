#include "crowdnav/world/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crowdnav::world {

namespace {

constexpr double kContactTolerance = 1e-6;

// Candidate displacements tried in order when walls block the full move.
struct AxisMove {
  Vec2 step;
  bool keep_x;
  bool keep_y;
};

// Returns the accepted displacement; clears velocity components along a
// blocked axis.
Vec2 slide_against_walls(const OccupancyGrid& grid, Vec2 from, Vec2 step, double radius, Vec2& velocity) {
  const AxisMove moves[] = {{step, true, true}, {{step.x, 0.0}, true, false}, {{0.0, step.y}, false, true}};
  for (const auto& m : moves) {
    if (m.step == Vec2{} && !(step == Vec2{})) continue;
    if (!grid.disc_hits_obstacle(from + m.step, radius)) {
      if (!m.keep_x) velocity.x = 0.0;
      if (!m.keep_y) velocity.y = 0.0;
      return m.step;
    }
  }
  velocity = {};
  return {};
}

// Fraction in [0, 1] of `step` that can be travelled before the disc at
// `from` touches `other`.
double contact_fraction(Vec2 from, Vec2 step, double radius, const AgentState& other) {
  const Vec2 c = other.pose.position();
  const double rsum = radius + other.radius;
  const Vec2 rel = from - c;
  const double len2 = step.squared_norm();
  if (len2 == 0.0) return 1.0;
  const double b = rel.dot(step);
  const double cc = rel.squared_norm() - rsum * rsum;
  if (cc <= 0.0) return b >= 0.0 ? 1.0 : 0.0;  // already touching: only moving apart is allowed
  const double disc = b * b - len2 * cc;
  if (disc < 0.0) return 1.0;
  const double t = (-b - std::sqrt(disc)) / len2;
  if (t < 0.0 || t > 1.0) return 1.0;
  return t;
}

}  // namespace

double WorldConfig::max_speed(const AgentState& agent) const {
  switch (agent.kind) {
    case AgentKind::avatar: return walk_speed;
    case AgentKind::robot: return robot_max_linear;
    case AgentKind::npc: return npc_speed_factor * agent.desired_speed;
  }
  return 0.0;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::collision_start: return "collision";
    case EventKind::waypoint_reached: return "waypoint_reached";
    case EventKind::goal_reached: return "goal_reached";
  }
  return "unknown";
}

const AgentState* WorldState::find(int id) const {
  for (const auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

AgentState* WorldState::find(int id) {
  for (auto& a : agents)
    if (a.id == id) return &a;
  return nullptr;
}

const AgentState* WorldState::first_of(AgentKind kind) const {
  for (const auto& a : agents)
    if (a.kind == kind) return &a;
  return nullptr;
}

std::string pair_kind(AgentKind a, AgentKind b) {
  if (b < a) std::swap(a, b);
  return std::string(to_string(a)) + "-" + std::string(to_string(b));
}

AgentState apply_avatar_command(const AgentState& avatar, const AvatarCommand& cmd, double dt,
                                double walk_speed, const OccupancyGrid& grid,
                                std::span<const AgentState> others) {
  AgentState out = avatar;
  const Vec2 dir = cmd.direction();
  const Vec2 full = dir * (walk_speed * dt);
  const Vec2 from = avatar.pose.position();

  Vec2 taken{};
  if (!(full == Vec2{})) {
    const Vec2 candidates[] = {full, {full.x, 0.0}, {0.0, full.y}};
    for (const Vec2& cand : candidates) {
      if (cand == Vec2{}) continue;
      if (grid.disc_hits_obstacle(from + cand, avatar.radius)) continue;
      double t = 1.0;
      for (const auto& other : others) {
        if (other.id == avatar.id) continue;
        t = std::min(t, contact_fraction(from, cand, avatar.radius, other));
      }
      if (t > 0.0) {
        taken = cand * t;
        break;
      }
    }
  }

  out.pose.x = from.x + taken.x;
  out.pose.y = from.y + taken.y;
  out.velocity = taken / dt;
  if (!(taken == Vec2{})) out.pose.theta = normalize_angle(std::atan2(taken.y, taken.x));
  return out;
}

std::vector<double> raycast_lidar(const OccupancyGrid& grid, std::span<const AgentState> agents,
                                  Pose2D origin, int n_beams, double max_range) {
  if (n_beams < 1) throw std::invalid_argument("raycast_lidar: n_beams must be >= 1");
  const Vec2 o = origin.position();
  std::vector<double> ranges(static_cast<std::size_t>(n_beams), 0.0);
  if (grid.occupied(grid.cell_of(o))) return ranges;

  for (int k = 0; k < n_beams; ++k) {
    const double angle = origin.theta + 2.0 * std::numbers::pi * k / n_beams;
    const Vec2 dir = unit_from_angle(angle);
    double best = grid.raycast(o, dir, max_range);
    for (const auto& agent : agents) {
      const Vec2 rel = o - agent.pose.position();
      const double c = rel.squared_norm() - agent.radius * agent.radius;
      if (c <= 0.0) continue;  // sensor inside this disc
      const double b = rel.dot(dir);
      const double disc = b * b - c;
      if (disc < 0.0) continue;
      const double t = -b - std::sqrt(disc);
      if (t >= 0.0 && t < best) best = t;
    }
    ranges[static_cast<std::size_t>(k)] = best;
  }
  return ranges;
}

std::vector<WorldEvent> resolve_collisions(WorldState& world, double margin, Vec2 avatar_step) {
  std::vector<WorldEvent> events;
  auto& agents = world.agents;
  const OccupancyGrid* grid = world.grid.get();

  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t j = i + 1; j < agents.size(); ++j) {
      AgentState& ai = agents[i];
      AgentState& aj = agents[j];
      const Vec2 diff = ai.pose.position() - aj.pose.position();
      const double d = diff.norm();
      const double rsum = ai.radius + aj.radius;
      const ContactKey key{std::min(ai.id, aj.id), std::max(ai.id, aj.id)};

      if (d <= rsum + kContactTolerance) {
        if (world.contacts.insert(key).second) {
          WorldEvent ev;
          ev.kind = EventKind::collision_start;
          ev.tick = world.tick;
          ev.agent = key.a;
          ev.other = key.b;
          ev.pair_kind = pair_kind(ai.kind, aj.kind);
          const AgentState* av = ai.kind == AgentKind::avatar ? &ai : (aj.kind == AgentKind::avatar ? &aj : nullptr);
          const AgentState* rb = ai.kind == AgentKind::robot ? &ai : (aj.kind == AgentKind::robot ? &aj : nullptr);
          if (av && rb) ev.push = avatar_step.dot(rb->pose.position() - av->pose.position()) > 0.0;
          events.push_back(std::move(ev));
        }
      } else if (d > rsum + margin) {
        world.contacts.erase(key);
      }

      if (d >= rsum) continue;
      const double pen = rsum - d;
      const Vec2 n = d > 0.0 ? diff / d : coincident_direction(ai.id, aj.id);
      const Vec2 half = n * (pen * 0.5);
      const Vec2 pi = ai.pose.position() + half;
      const Vec2 pj = aj.pose.position() - half;
      const bool ok_i = !grid || !grid->disc_hits_obstacle(pi, ai.radius);
      const bool ok_j = !grid || !grid->disc_hits_obstacle(pj, aj.radius);
      Vec2 shift_i{}, shift_j{};
      if (ok_i && ok_j) {
        shift_i = half;
        shift_j = -half;
      } else if (ok_i) {
        shift_i = n * pen;
      } else if (ok_j) {
        shift_j = -(n * pen);
      }
      ai.pose.x += shift_i.x;
      ai.pose.y += shift_i.y;
      aj.pose.x += shift_j.x;
      aj.pose.y += shift_j.y;
    }
  }
  return events;
}

World::World(std::shared_ptr<const OccupancyGrid> grid, WorldConfig config, std::vector<AgentState> agents,
             RoutePlanner planner)
    : config_(config), planner_(std::move(planner)) {
  if (!grid) throw std::invalid_argument("World needs a grid");
  if (!config_.social.valid()) throw std::invalid_argument("social force parameters must be positive");
  int avatars = 0, robots = 0;
  std::set<int> ids;
  for (const auto& a : agents) {
    if (!ids.insert(a.id).second) throw std::invalid_argument("duplicate agent id");
    if (a.radius < 0.2 || a.radius > 0.6) throw std::invalid_argument("agent radius outside [0.2, 0.6]");
    avatars += a.kind == AgentKind::avatar;
    robots += a.kind == AgentKind::robot;
  }
  if (avatars != 1) throw std::invalid_argument("a world holds exactly one avatar");
  if (robots > 1) throw std::invalid_argument("a world holds at most one robot");

  state_.grid = std::move(grid);
  state_.agents = std::move(agents);
  for (const auto& a : state_.agents) {
    if (a.kind != AgentKind::npc) continue;
    NpcRoute route;
    plan_route(a, a.pose.position(), a.goal.position(), route);
    routes_.emplace_back(a.id, std::move(route));
    npc_starts_.emplace_back(a.id, a.pose);
  }
}

const NpcRoute* World::route(int npc_id) const {
  for (const auto& [id, r] : routes_)
    if (id == npc_id) return &r;
  return nullptr;
}

void World::plan_route(const AgentState&, Vec2 from, Vec2 to, NpcRoute& route) const {
  route.waypoints.clear();
  if (planner_) route.waypoints = planner_(from, to);
  if (route.waypoints.empty() || !(route.waypoints.back() == to)) route.waypoints.push_back(to);
  route.next = 0;
}

void World::step_npcs(std::vector<WorldEvent>& events) {
  const std::vector<AgentState> snapshot = state_.agents;
  const OccupancyGrid& grid = *state_.grid;
  for (std::size_t i = 0; i < state_.agents.size(); ++i) {
    AgentState& npc = state_.agents[i];
    if (npc.kind != AgentKind::npc) continue;
    NpcRoute* route = nullptr;
    for (auto& [id, r] : routes_)
      if (id == npc.id) route = &r;
    const Vec2 wp = route->waypoints[route->next];

    const Vec2 force = social_force(snapshot[i], snapshot, grid, config_.social, wp);
    Vec2 v = npc.velocity + force * config_.dt;
    const double cap = config_.max_speed(npc);
    const double speed = v.norm();
    if (speed > cap) v = v * (cap / speed);
    const Vec2 step = slide_against_walls(grid, npc.pose.position(), v * config_.dt, npc.radius, v);
    npc.pose.x += step.x;
    npc.pose.y += step.y;
    npc.velocity = v;
    if (v.norm() > 1e-6) npc.pose.theta = normalize_angle(std::atan2(v.y, v.x));

    if (distance(npc.pose.position(), wp) <= config_.waypoint_radius) {
      const bool last = route->next + 1 == route->waypoints.size();
      WorldEvent ev;
      ev.kind = last ? EventKind::goal_reached : EventKind::waypoint_reached;
      ev.tick = state_.tick;
      ev.agent = npc.id;
      events.push_back(ev);
      if (!last) {
        ++route->next;
      } else {
        // Loop between start and goal for the whole session.
        Pose2D start{};
        for (const auto& [id, p] : npc_starts_)
          if (id == npc.id) start = p;
        route->outbound = !route->outbound;
        const Vec2 target = route->outbound ? npc.goal.position() : start.position();
        plan_route(npc, npc.pose.position(), target, *route);
      }
    }
  }
}

void World::step_robot(const RobotCommand& cmd) {
  for (auto& robot : state_.agents) {
    if (robot.kind != AgentKind::robot) continue;
    const double v = std::clamp(cmd.linear, -config_.robot_max_linear, config_.robot_max_linear);
    const double w = std::clamp(cmd.angular, -config_.robot_max_angular, config_.robot_max_angular);
    robot.pose.theta = normalize_angle(robot.pose.theta + w * config_.dt);
    Vec2 vel = unit_from_angle(robot.pose.theta) * v;
    const Vec2 step = slide_against_walls(*state_.grid, robot.pose.position(), vel * config_.dt, robot.radius, vel);
    robot.pose.x += step.x;
    robot.pose.y += step.y;
    robot.velocity = vel;
  }
}

std::vector<WorldEvent> World::step(double dt, const AvatarCommand& avatar_cmd, const RobotCommand& robot_cmd) {
  if (dt != config_.dt) throw std::invalid_argument("World::step: dt differs from the configured timestep");
  std::vector<WorldEvent> events;
  step_npcs(events);

  Vec2 avatar_step{};
  for (auto& agent : state_.agents) {
    if (agent.kind != AgentKind::avatar) continue;
    const Vec2 before = agent.pose.position();
    agent = apply_avatar_command(agent, avatar_cmd, dt, config_.walk_speed, *state_.grid, state_.agents);
    avatar_step = agent.pose.position() - before;
  }

  step_robot(robot_cmd);

  auto contacts = resolve_collisions(state_, config_.collision_margin, avatar_step);
  events.insert(events.end(), contacts.begin(), contacts.end());
  ++state_.tick;
  // Events belong to the state they produced.
  for (auto& ev : events) ev.tick = state_.tick;
  return events;
}

}  // namespace crowdnav::world
