#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "crowdnav/agent.hpp"
#include "crowdnav/grid.hpp"
#include "crowdnav/world/social_force.hpp"

namespace crowdnav::world {

struct WorldConfig {
  double dt = 0.05;
  SocialForceParams social{};
  double walk_speed = 1.4;
  double npc_speed_factor = 1.3;  // NPC speed cap = factor * desired_speed
  double robot_max_linear = 0.8;
  double robot_max_angular = 1.5;
  double waypoint_radius = 0.4;
  double collision_margin = 0.1;

  double max_speed(const AgentState& agent) const;
};

enum class EventKind : std::uint8_t { collision_start, waypoint_reached, goal_reached };

std::string_view to_string(EventKind kind);

struct WorldEvent {
  EventKind kind = EventKind::collision_start;
  std::uint64_t tick = 0;
  int agent = 0;
  int other = -1;         // collision partner
  std::string pair_kind;  // e.g. "avatar-robot", collisions only
  bool push = false;      // avatar walked into the robot
};

/// Unordered agent pair currently in contact; a < b.
struct ContactKey {
  int a = 0;
  int b = 0;
  auto operator<=>(const ContactKey&) const = default;
};

struct WorldState {
  std::uint64_t tick = 0;
  std::vector<AgentState> agents;
  std::shared_ptr<const OccupancyGrid> grid;
  std::set<ContactKey> contacts;

  double sim_time(double dt) const { return static_cast<double>(tick) * dt; }
  const AgentState* find(int id) const;
  AgentState* find(int id);
  const AgentState* first_of(AgentKind kind) const;
};

/// "avatar-npc", "npc-robot", ... with kinds in enum order.
std::string pair_kind(AgentKind a, AgentKind b);

/// Moves the avatar by walk_speed * dt along the key direction. Walls block
/// (sliding along a free axis when possible); other agents clip the motion at
/// contact.
AgentState apply_avatar_command(const AgentState& avatar, const AvatarCommand& cmd, double dt,
                                double walk_speed, const OccupancyGrid& grid,
                                std::span<const AgentState> others);

/// Range to the first occupied cell or agent disc for each of `n_beams`
/// beams spread evenly from origin.theta. Discs containing the origin are
/// ignored (the sensor's own body).
std::vector<double> raycast_lidar(const OccupancyGrid& grid, std::span<const AgentState> agents,
                                  Pose2D origin, int n_beams, double max_range);

/// Separates overlapping pairs (half the penetration each) and tracks contact
/// episodes. A collision_start event fires once per episode; the episode ends
/// when the pair separates beyond radius-sum + margin. `avatar_step` is the
/// avatar's displacement this tick, used to tag pushes.
std::vector<WorldEvent> resolve_collisions(WorldState& world, double margin, Vec2 avatar_step = {});

/// Produces waypoints from `from` to `to` for NPC routing. An empty result
/// means "walk straight".
using RoutePlanner = std::function<std::vector<Vec2>(Vec2 from, Vec2 to)>;

struct NpcRoute {
  std::vector<Vec2> waypoints;  // ends at the current goal
  std::size_t next = 0;
  bool outbound = true;
};

/// Fixed-timestep world owning the avatar, NPCs and robot body.
class World {
 public:
  World(std::shared_ptr<const OccupancyGrid> grid, WorldConfig config, std::vector<AgentState> agents,
        RoutePlanner planner = {});

  /// Advances one tick. `dt` must equal the configured timestep.
  std::vector<WorldEvent> step(double dt, const AvatarCommand& avatar_cmd, const RobotCommand& robot_cmd);

  const WorldState& state() const { return state_; }
  const WorldConfig& config() const { return config_; }
  const OccupancyGrid& grid() const { return *state_.grid; }
  double sim_time() const { return state_.sim_time(config_.dt); }
  const NpcRoute* route(int npc_id) const;

 private:
  void plan_route(const AgentState& npc, Vec2 from, Vec2 to, NpcRoute& route) const;
  void step_npcs(std::vector<WorldEvent>& events);
  void step_robot(const RobotCommand& cmd);

  WorldConfig config_;
  WorldState state_;
  RoutePlanner planner_;
  std::vector<std::pair<int, NpcRoute>> routes_;
  std::vector<std::pair<int, Pose2D>> npc_starts_;
};

}  // namespace crowdnav::world
