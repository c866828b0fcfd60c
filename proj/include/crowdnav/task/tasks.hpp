#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnav/world/world.hpp"

namespace crowdnav::task {

/// Participant script phases, in order. The last two are reserved for future
/// tasks (blocking the robot's path, walking alongside it) and are never
/// entered by update_tasks.
enum class Phase : std::uint8_t { find_robot, follow_robot, reach_landmark, done, block_path, walk_alongside };

std::string_view to_string(Phase phase);
std::optional<Phase> parse_phase(std::string_view text);

struct TaskParams {
  double find_radius = 5.0;      // m, with grid line of sight
  double follow_radius = 3.0;    // m
  double follow_duration = 30.0; // s, accumulated
  double goal_radius = 1.0;      // m around the landmark
};

struct TaskState {
  Phase phase = Phase::find_robot;
  std::uint64_t follow_ticks = 0;
  double follow_accum = 0.0;  // follow_ticks * dt, capped at follow_duration
  /// Sim time at which each of the three tasks completed.
  std::array<std::optional<double>, 3> completed_at{};

  bool done() const { return phase == Phase::done; }
};

struct TaskEvent {
  Phase completed = Phase::find_robot;
  Phase next = Phase::follow_robot;
  double sim_time = 0.0;
};

/// Advances the script by one tick of length `dt` against the post-step
/// world. At most one phase transition per call; phases never regress.
std::vector<TaskEvent> update_tasks(TaskState& state, const world::WorldState& world, Pose2D landmark,
                                    double dt, const TaskParams& params = {});

}  // namespace crowdnav::task
