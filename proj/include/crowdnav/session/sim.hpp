#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crowdnav/nav/navigator.hpp"
#include "crowdnav/task/scenario.hpp"
#include "crowdnav/task/tasks.hpp"
#include "crowdnav/telemetry/sink.hpp"
#include "crowdnav/telemetry/summary.hpp"
#include "crowdnav/world/world.hpp"

namespace crowdnav::session {

struct SimOptions {
  double dt = 0.05;
  std::uint64_t session_seed = 0;
  int lidar_every = 10;  // ticks between logged scans; 0 disables
  int lidar_beams = 180;
  double lidar_range = 8.0;
  world::WorldConfig world{};
  nav::NavConfig nav{};
  task::TaskParams tasks{};
};

struct SimStep {
  std::uint64_t tick = 0;
  std::vector<telemetry::EventRecord> events;
  bool tasks_done = false;
  bool time_up = false;
};

/// One participant session without any networking: world, robot autonomy,
/// task script and (optionally) the telemetry sink. Stepping is
/// deterministic for a given scenario, options and command sequence.
class SessionSim {
 public:
  SessionSim(const task::Scenario& scenario, SimOptions options, std::unique_ptr<telemetry::TelemetrySink> sink = {},
             telemetry::HeaderRecord header = {});

  SimStep step(const AvatarCommand& cmd);

  /// Writes the end record, closes the log and returns the summary
  /// (flagged partial when the sink degraded). Idempotent.
  telemetry::MetricsSummary finish(telemetry::Outcome outcome);

  const world::WorldState& state() const { return world_.state(); }
  const task::TaskState& tasks() const { return tasks_; }
  const task::Scenario& scenario() const { return scenario_; }
  const nav::RobotNavigator& navigator() const { return navigator_; }
  double sim_time() const { return world_.sim_time(); }
  double time_limit() const { return scenario_.time_limit; }
  bool finished() const { return finished_.has_value(); }
  const telemetry::TelemetrySink* sink() const { return sink_.get(); }

 private:
  void log(const telemetry::LogRecord& record);

  task::Scenario scenario_;
  SimOptions options_;
  world::World world_;
  nav::RobotNavigator navigator_;
  task::TaskState tasks_;
  std::unique_ptr<telemetry::TelemetrySink> sink_;
  telemetry::SummaryBuilder summary_;
  std::optional<telemetry::MetricsSummary> finished_;
};

/// Route planner for NPCs walking the scenario map.
world::RoutePlanner npc_route_planner(std::shared_ptr<const OccupancyGrid> grid, double radius);

}  // namespace crowdnav::session
