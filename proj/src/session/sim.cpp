#include "crowdnav/session/sim.hpp"

#include <stdexcept>

namespace crowdnav::session {

world::RoutePlanner npc_route_planner(std::shared_ptr<const OccupancyGrid> grid, double radius) {
  auto router = std::make_shared<nav::PedestrianRouter>(std::move(grid), radius);
  return [router](Vec2 from, Vec2 to) { return router->route(from, to); };
}

namespace {

world::WorldConfig with_dt(world::WorldConfig c, double dt) {
  c.dt = dt;
  return c;
}

telemetry::EventRecord from_world(const world::WorldEvent& ev, double dt) {
  telemetry::EventRecord r;
  r.tick = ev.tick;
  r.sim_time = static_cast<double>(ev.tick) * dt;
  r.agent = ev.agent;
  r.other = ev.other;
  switch (ev.kind) {
    case world::EventKind::collision_start:
      r.kind = "collision";
      r.pair_kind = ev.pair_kind;
      r.push = ev.push;
      break;
    case world::EventKind::waypoint_reached: r.kind = "waypoint_reached"; break;
    case world::EventKind::goal_reached: r.kind = "goal_reached"; break;
  }
  return r;
}

}  // namespace

SessionSim::SessionSim(const task::Scenario& scenario, SimOptions options, std::unique_ptr<telemetry::TelemetrySink> sink,
                       telemetry::HeaderRecord header)
    : scenario_(scenario),
      options_(options),
      world_(scenario.map, with_dt(options.world, options.dt), scenario.initial_agents(options.session_seed),
             npc_route_planner(scenario.map, task::kNpcRadius)),
      navigator_(scenario.map, options.nav, scenario.robot_goal),
      sink_(std::move(sink)) {
  if (!scenario.map) throw std::invalid_argument("SessionSim: scenario has no map");
  header.scenario_id = scenario.id;
  header.dt = options.dt;
  header.decimation = sink_ ? sink_->decimation() : 1;
  header.avatar_start = scenario.avatar_start.position();
  log(header);
}

void SessionSim::log(const telemetry::LogRecord& record) {
  summary_.add(record);
  if (sink_) sink_->write(record);
}

SimStep SessionSim::step(const AvatarCommand& cmd) {
  if (finished_) throw std::logic_error("SessionSim::step after finish");
  const auto& agents = world_.state().agents;
  const int robot_id = 1;
  const nav::NavTickResult nav = navigator_.tick(agents, robot_id, world_.sim_time());
  auto world_events = world_.step(options_.dt, cmd, nav.command);

  SimStep out;
  out.tick = world_.state().tick;
  const double now = world_.sim_time();
  for (const auto& ev : world_events) {
    // NPC waypoint chatter stays out of the log.
    if (ev.kind != world::EventKind::collision_start) continue;
    out.events.push_back(from_world(ev, options_.dt));
  }
  for (const auto& ev : nav.events) {
    if (ev.kind == nav::NavEventKind::replanned) continue;
    telemetry::EventRecord r;
    r.tick = out.tick;
    r.sim_time = now;
    r.kind = ev.kind == nav::NavEventKind::goal_reached ? "robot_goal_reached" : "nav_failed";
    r.agent = robot_id;
    out.events.push_back(r);
  }
  for (const auto& ev : task::update_tasks(tasks_, world_.state(), scenario_.landmark.pose, options_.dt, options_.tasks)) {
    telemetry::EventRecord r;
    r.tick = out.tick;
    r.sim_time = ev.sim_time;
    r.kind = "phase";
    r.agent = 0;
    r.completed = std::string(task::to_string(ev.completed));
    r.next = std::string(task::to_string(ev.next));
    out.events.push_back(r);
  }

  const bool want_tick = !sink_ || sink_->wants_tick(out.tick);
  if (want_tick) {
    telemetry::TickRecord rec = telemetry::make_tick_record(world_.state(), tasks_, options_.dt);
    if (options_.lidar_every > 0 && out.tick % static_cast<std::uint64_t>(options_.lidar_every) == 0) {
      if (const AgentState* robot = world_.state().find(robot_id))
        rec.lidar = world::raycast_lidar(*scenario_.map, world_.state().agents, robot->pose, options_.lidar_beams,
                                         options_.lidar_range);
    }
    log(rec);
  }
  for (const auto& ev : out.events) log(ev);

  out.tasks_done = tasks_.done();
  out.time_up = now >= scenario_.time_limit - 1e-9;
  return out;
}

telemetry::MetricsSummary SessionSim::finish(telemetry::Outcome outcome) {
  if (finished_) return *finished_;
  telemetry::EndRecord end;
  end.tick = world_.state().tick;
  end.sim_time = world_.sim_time();
  end.outcome = outcome;
  end.degraded = sink_ && sink_->degraded();
  log(end);
  if (sink_) {
    sink_->close();
    if (sink_->degraded()) summary_.mark_partial();
  }
  finished_ = summary_.finish(outcome);
  return *finished_;
}

}  // namespace crowdnav::session
