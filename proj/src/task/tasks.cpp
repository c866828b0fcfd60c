#include "crowdnav/task/tasks.hpp"

#include <algorithm>
#include <stdexcept>

namespace crowdnav::task {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::find_robot: return "find_robot";
    case Phase::follow_robot: return "follow_robot";
    case Phase::reach_landmark: return "reach_landmark";
    case Phase::done: return "done";
    case Phase::block_path: return "block_path";
    case Phase::walk_alongside: return "walk_alongside";
  }
  return "done";
}

std::optional<Phase> parse_phase(std::string_view text) {
  for (Phase p : {Phase::find_robot, Phase::follow_robot, Phase::reach_landmark, Phase::done, Phase::block_path,
                  Phase::walk_alongside})
    if (to_string(p) == text) return p;
  return std::nullopt;
}

std::vector<TaskEvent> update_tasks(TaskState& state, const world::WorldState& world, Pose2D landmark,
                                    double dt, const TaskParams& params) {
  std::vector<TaskEvent> events;
  const AgentState* avatar = world.first_of(AgentKind::avatar);
  const AgentState* robot = world.first_of(AgentKind::robot);
  if (!avatar || !robot) throw std::invalid_argument("update_tasks: world needs an avatar and a robot");

  const double now = world.sim_time(dt);
  const Vec2 a = avatar->pose.position();
  const Vec2 r = robot->pose.position();
  const double d_robot = distance(a, r);

  auto advance = [&](Phase next) {
    const auto idx = static_cast<std::size_t>(state.phase);
    state.completed_at[idx] = now;
    events.push_back({state.phase, next, now});
    state.phase = next;
  };

  switch (state.phase) {
    case Phase::find_robot:
      if (d_robot <= params.find_radius && world.grid && world.grid->line_of_sight(a, r))
        advance(Phase::follow_robot);
      break;
    case Phase::follow_robot:
      if (d_robot <= params.follow_radius) ++state.follow_ticks;
      state.follow_accum = std::min(static_cast<double>(state.follow_ticks) * dt, params.follow_duration);
      if (static_cast<double>(state.follow_ticks) * dt >= params.follow_duration - 1e-9)
        advance(Phase::reach_landmark);
      break;
    case Phase::reach_landmark:
      if (distance(a, landmark.position()) <= params.goal_radius) advance(Phase::done);
      break;
    default:
      break;
  }
  return events;
}

}  // namespace crowdnav::task
