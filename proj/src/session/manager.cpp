#include "crowdnav/session/manager.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <set>

#include <spdlog/spdlog.h>

#include "crowdnav/random.hpp"
#include "crowdnav/session/sim.hpp"
#include "crowdnav/task/trials.hpp"
#include "crowdnav/telemetry/summary.hpp"

namespace crowdnav::session {

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::queued: return "queued";
    case SessionState::launching: return "launching";
    case SessionState::running: return "running";
    case SessionState::expired: return "expired";
    case SessionState::closed: return "closed";
  }
  return "closed";
}

namespace {

bool token_ok(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

std::optional<double> parse_number(std::string_view text) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<Pose2D> parse_pose_param(const std::string& text) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const auto v = parse_number(std::string_view(text).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!v) return std::nullopt;
    parts.push_back(*v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  return Pose2D::make(parts[0], parts[1], parts.size() == 3 ? parts[2] : 0.0);
}

}  // namespace

std::variant<LaunchRequest, std::string> parse_launch_request(
    const std::vector<std::pair<std::string, std::string>>& params) {
  LaunchRequest req;
  std::set<std::string> seen;
  for (const auto& [name, value] : params) {
    if (std::find(std::begin(kAllowedParams), std::end(kAllowedParams), name) == std::end(kAllowedParams))
      return "parameter not allowed: " + name;
    if (!seen.insert(name).second) return "duplicate parameter: " + name;
    if (name == "user_id") {
      if (!token_ok(value)) return std::string("malformed user_id");
      req.user_id = value;
    } else if (name == "scenario") {
      if (!token_ok(value)) return std::string("malformed scenario");
      req.scenario_id = value;
    } else if (name == "trial") {
      int t = -1;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), t);
      if (ec != std::errc() || ptr != value.data() + value.size() || t < 0 || t > 999)
        return std::string("malformed trial");
      req.trial = t;
    } else {
      const auto pose = parse_pose_param(value);
      if (!pose) return "malformed " + name;
      if (name == "avatar_start") req.avatar_start = pose;
      else if (name == "avatar_goal") req.avatar_goal = pose;
      else if (name == "robot_start") req.robot_start = pose;
      else req.robot_goal = pose;
    }
  }
  if (req.user_id.empty()) return std::string("missing user_id");
  return req;
}

struct SessionManager::Worker {
  std::thread thread;
  std::unique_ptr<SessionSim> sim;
  std::shared_ptr<SessionChannel> channel;
  std::atomic<telemetry::Outcome> stop_outcome{telemetry::Outcome::shutdown};
  telemetry::Outcome outcome = telemetry::Outcome::unknown;
  std::string reason;
};

SessionManager::SessionManager(HostConfig config, task::ScenarioCatalog catalog)
    : SessionManager(std::move(config), std::move(catalog), Options{}) {}

SessionManager::SessionManager(HostConfig config, task::ScenarioCatalog catalog, Options options)
    : config_(std::move(config)), catalog_(std::move(catalog)), options_(std::move(options)) {
  config_.validate();
  if (options_.background) {
    for (int i = 0; i < config_.launch_lanes; ++i) lanes_.emplace_back([this] { lane_loop(); });
    reaper_ = std::thread([this] { reaper_loop(); });
  }
}

SessionManager::~SessionManager() { shutdown(); }

std::variant<std::shared_ptr<const task::Scenario>, std::string> SessionManager::resolve_scenario(
    const LaunchRequest& req) const {
  std::string id = req.scenario_id;
  if (id.empty()) {
    if (req.trial >= 2 * task::kTrialsPerEnvironment) return std::string("trial out of range");
    try {
      id = task::make_trial_sequence(catalog_, stable_hash(req.user_id))[static_cast<std::size_t>(req.trial)].scenario_id;
    } catch (const task::ConfigError& e) {
      return std::string("no trial sequence: ") + e.what();
    }
  }
  const task::Scenario* base = catalog_.find(id);
  if (!base) return "unknown scenario: " + id;
  auto s = std::make_shared<task::Scenario>(*base);
  s->time_limit = config_.time_limit;
  const bool overridden = req.avatar_start || req.avatar_goal || req.robot_start || req.robot_goal;
  if (req.avatar_start) s->avatar_start = *req.avatar_start;
  if (req.avatar_goal) s->avatar_goal = *req.avatar_goal;
  if (req.robot_start) s->robot_start = *req.robot_start;
  if (req.robot_goal) s->robot_goal = *req.robot_goal;
  if (overridden) {
    const auto violations = task::validate_scenario(*s, *s->map);
    if (!violations.empty()) return "invalid pose override: " + violations.front();
  }
  return std::shared_ptr<const task::Scenario>(std::move(s));
}

SessionOutcome SessionManager::handle_session_request(const LaunchRequest& req) {
  SessionOutcome out;
  auto existing = [&]() -> bool {
    const auto it = active_by_user_.find(req.user_id);
    if (it == active_by_user_.end()) return false;
    const Record& rec = records_.at(it->second);
    out.session_id = rec.info.session_id;
    out.kind = rec.info.state == SessionState::running ? SessionOutcome::Kind::attach : SessionOutcome::Kind::pending;
    return true;
  };
  {
    std::lock_guard lock(mutex_);
    if (stopping_) {
      out.reason = "capacity";
      out.detail = "host shutting down";
      out.retry_after = config_.retry_after;
      return out;
    }
    if (existing()) return out;
  }
  if (!token_ok(req.user_id)) {
    out.reason = "bad_request";
    out.detail = "malformed user_id";
    return out;
  }
  auto resolved = resolve_scenario(req);
  if (auto* err = std::get_if<std::string>(&resolved)) {
    out.reason = "bad_request";
    out.detail = *err;
    return out;
  }
  auto scenario = std::get<std::shared_ptr<const task::Scenario>>(std::move(resolved));

  std::lock_guard lock(mutex_);
  if (existing()) return out;
  if (static_cast<int>(active_by_user_.size()) >= config_.max_sessions) {
    out.reason = "capacity";
    out.retry_after = config_.retry_after;
    return out;
  }
  Record rec;
  rec.info.session_id = config_.host_id + "." + req.user_id + "." + std::to_string(req.trial) + "." +
                        std::to_string(next_session_++);
  rec.info.user_id = req.user_id;
  rec.info.host_id = config_.host_id;
  rec.info.scenario_id = scenario->id;
  rec.info.trial = req.trial;
  rec.info.state = SessionState::queued;
  rec.info.created_at = options_.now();
  const double factor = config_.pacing == Pacing::lockstep ? config_.lockstep_wall_factor : 1.0;
  rec.info.deadline = rec.info.created_at + std::chrono::duration_cast<Clock::duration>(
                                                std::chrono::duration<double>(config_.time_limit * factor));
  rec.scenario = std::move(scenario);
  rec.seed = stable_hash(req.user_id + ":" + rec.info.scenario_id + ":" + std::to_string(req.trial));
  const std::string id = rec.info.session_id;
  records_.emplace(id, std::move(rec));
  active_by_user_[req.user_id] = id;
  queue_.push_back(id);
  queue_cv_.notify_one();
  out.kind = SessionOutcome::Kind::pending;
  out.session_id = id;
  return out;
}

std::optional<std::string> SessionManager::launch_next() {
  std::string id;
  std::shared_ptr<const task::Scenario> scenario;
  std::uint64_t seed = 0;
  std::string user;
  {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) return std::nullopt;
    id = queue_.front();
    queue_.pop_front();
    Record& rec = records_.at(id);
    rec.info.state = SessionState::launching;
    rec.info.launched_at = options_.now();
    rec.info.launch_seq = next_launch_++;
    scenario = rec.scenario;
    seed = rec.seed;
    user = rec.info.user_id;
  }

  std::unique_ptr<SessionSim> sim;
  try {
    std::filesystem::create_directories(config_.data_dir);
    auto sink = std::make_unique<telemetry::TelemetrySink>(config_.data_dir / (id + ".log"), config_.decimation);
    telemetry::HeaderRecord header;
    header.session_id = id;
    header.host_id = config_.host_id;
    header.user_id = user;
    SimOptions opts;
    opts.dt = 1.0 / config_.tick_rate;
    opts.session_seed = seed;
    opts.lidar_every = config_.lidar_every;
    sim = std::make_unique<SessionSim>(*scenario, opts, std::move(sink), header);
  } catch (const std::exception& e) {
    spdlog::warn("session {}: launch failed: {}", id, e.what());
    std::lock_guard lock(mutex_);
    Record& rec = records_.at(id);
    if (!is_terminal(rec.info.state)) {
      rec.info.state = SessionState::closed;
      rec.info.close_reason = "io_failure";
      rec.info.outcome = telemetry::Outcome::failed;
      active_by_user_.erase(rec.info.user_id);
    }
    return id;
  }

  HelloMessage hello;
  hello.session_id = id;
  hello.user_id = user;
  hello.scenario_id = scenario->id;
  hello.pacing = std::string(to_string(config_.pacing));
  hello.dt = 1.0 / config_.tick_rate;
  hello.time_limit = scenario->time_limit;
  hello.landmark = scenario->landmark.pose.position();
  hello.landmark_tag = scenario->landmark.tag;
  auto channel = std::make_shared<SessionChannel>(encode_server(hello));

  std::unique_lock lock(mutex_);
  Record& rec = records_.at(id);
  if (rec.info.state != SessionState::launching) {
    // Expired or shut down while launching: finalize without a worker.
    const auto outcome = rec.info.state == SessionState::expired ? telemetry::Outcome::expired : telemetry::Outcome::shutdown;
    lock.unlock();
    const auto summary = sim->finish(outcome);
    try {
      telemetry::write_summary_file(config_.data_dir, summary);
    } catch (const std::exception& e) {
      spdlog::warn("session {}: {}", id, e.what());
    }
    return id;
  }
  rec.info.state = SessionState::running;
  rec.channel = channel;
  auto worker = std::make_unique<Worker>();
  worker->sim = std::move(sim);
  worker->channel = channel;
  Worker* raw = worker.get();
  workers_.emplace(id, std::move(worker));
  raw->thread = std::thread([this, id, raw] { worker_main(id, raw); });
  spdlog::debug("session {} running", id);
  return id;
}

void SessionManager::worker_main(const std::string& id, Worker* w) {
  SessionSim& sim = *w->sim;
  SessionChannel& ch = *w->channel;
  auto snapshot = [&] {
    SnapshotMessage snap;
    snap.tick = sim.state().tick;
    snap.time = sim.sim_time();
    snap.phase = std::string(task::to_string(sim.tasks().phase));
    snap.follow = sim.tasks().follow_accum;
    for (const auto& a : sim.state().agents)
      snap.agents.push_back({a.id, a.kind, a.pose.x, a.pose.y, a.pose.theta, 0.0, 0.0, a.radius});
    ch.publish(encode_server(snap), true);
  };

  telemetry::Outcome outcome = telemetry::Outcome::unknown;
  std::string reason;
  const bool lockstep = config_.pacing == Pacing::lockstep;
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / config_.tick_rate));
  try {
    snapshot();
    auto next = Clock::now();
    while (true) {
      AvatarCommand cmd;
      if (lockstep) {
        const auto keys = ch.wait_keys(sim.state().tick);
        if (!keys) break;
        cmd = *keys;
      } else {
        next += period;
        const auto now = Clock::now();
        if (now > next + 5 * period) next = now;  // fell far behind: do not burst
        if (!ch.sleep_until(next)) break;
        cmd = ch.current_keys();
      }
      const SimStep step = sim.step(cmd);
      for (const auto& ev : step.events) ch.publish(encode_server(EventMessage{ev}), false);
      if (lockstep || step.tick % static_cast<std::uint64_t>(config_.snapshot_every) == 0 || step.tasks_done ||
          step.time_up)
        snapshot();
      if (step.tasks_done) {
        outcome = telemetry::Outcome::completed;
        reason = "completed";
        break;
      }
      if (step.time_up) {
        outcome = telemetry::Outcome::expired;
        reason = "expired";
        break;
      }
      if (ch.stop_requested()) break;
    }
  } catch (const std::exception& e) {
    spdlog::error("session {}: worker error: {}", id, e.what());
    outcome = telemetry::Outcome::failed;
    reason = "worker_error";
  }
  if (outcome == telemetry::Outcome::unknown) {
    outcome = w->stop_outcome.load();
    reason = outcome == telemetry::Outcome::expired ? "expired" : "shutdown";
  }
  const auto summary = sim.finish(outcome);
  try {
    telemetry::write_summary_file(config_.data_dir, summary);
  } catch (const std::exception& e) {
    spdlog::warn("session {}: {}", id, e.what());
  }
  w->outcome = outcome;
  w->reason = reason;
  ch.close(encode_server(EndMessage{std::string(telemetry::to_string(outcome)), completion_code(id)}));
  worker_done(id);
}

void SessionManager::worker_done(const std::string& id) {
  std::lock_guard lock(mutex_);
  finished_.push_back(id);
  reaper_cv_.notify_all();
}

void SessionManager::settle(const std::string& id, telemetry::Outcome outcome, const std::string& reason) {
  Record& rec = records_.at(id);
  if (!is_terminal(rec.info.state))
    rec.info.state = outcome == telemetry::Outcome::expired ? SessionState::expired : SessionState::closed;
  rec.info.outcome = outcome;
  rec.info.close_reason = reason;
  const auto it = active_by_user_.find(rec.info.user_id);
  if (it != active_by_user_.end() && it->second == id) active_by_user_.erase(it);
}

std::vector<std::string> SessionManager::collect_finished() {
  std::lock_guard lock(mutex_);
  std::vector<std::string> done;
  for (const auto& id : finished_) {
    const auto it = workers_.find(id);
    if (it == workers_.end()) continue;
    // The worker has signalled and touches nothing shared any more.
    it->second->thread.join();
    settle(id, it->second->outcome, it->second->reason);
    workers_.erase(it);
    done.push_back(id);
  }
  finished_.clear();
  reaper_cv_.notify_all();
  return done;
}

std::vector<std::string> SessionManager::reap_expired(Clock::time_point now) {
  std::vector<std::string> expired;
  std::vector<std::shared_ptr<SessionChannel>> to_stop;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, rec] : records_) {
      if (rec.info.deadline > now) continue;
      if (rec.info.state == SessionState::launching) {
        settle(id, telemetry::Outcome::expired, "expired");
        expired.push_back(id);
      } else if (rec.info.state == SessionState::running) {
        const auto it = workers_.find(id);
        if (it != workers_.end() && it->second->stop_outcome != telemetry::Outcome::expired) {
          it->second->stop_outcome = telemetry::Outcome::expired;
          to_stop.push_back(it->second->channel);
          expired.push_back(id);
        }
      }
    }
  }
  for (auto& ch : to_stop) ch->request_stop();
  // Wait for the stopped workers to report, then settle them.
  for (const auto& id : expired) {
    std::unique_lock lock(mutex_);
    reaper_cv_.wait(lock, [&] {
      return std::find(finished_.begin(), finished_.end(), id) != finished_.end() || !workers_.contains(id);
    });
  }
  collect_finished();
  return expired;
}

void SessionManager::lane_loop() {
  while (true) {
    {
      std::unique_lock lock(mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
    }
    launch_next();
  }
}

void SessionManager::reaper_loop() {
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config_.reap_period));
  auto next = Clock::now() + period;
  while (true) {
    {
      std::unique_lock lock(mutex_);
      const auto wake = config_.reap_period > 0 ? next : Clock::now() + std::chrono::seconds(1);
      reaper_cv_.wait_until(lock, wake, [&] { return stopping_ || !finished_.empty(); });
      if (stopping_) return;
    }
    collect_finished();
    if (config_.reap_period > 0 && Clock::now() >= next) {
      reap_expired(options_.now());
      next += period;
      if (next < Clock::now()) next = Clock::now() + period;
    }
  }
}

HostStatus SessionManager::host_status() const {
  std::lock_guard lock(mutex_);
  HostStatus s;
  s.host_id = config_.host_id;
  s.capacity = config_.max_sessions;
  s.live_workers = workers_.size();
  for (const auto& [id, rec] : records_) {
    if (rec.info.state == SessionState::running) ++s.running;
    if (rec.info.state == SessionState::queued) ++s.queued;
    if (rec.info.state == SessionState::launching) ++s.launching;
    s.sessions.push_back(rec.info);
  }
  return s;
}

std::optional<SessionInfo> SessionManager::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(session_id);
  if (it == records_.end()) return std::nullopt;
  return it->second.info;
}

std::shared_ptr<SessionChannel> SessionManager::channel(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = records_.find(session_id);
  return it == records_.end() ? nullptr : it->second.channel;
}

std::size_t SessionManager::live_workers() const {
  std::lock_guard lock(mutex_);
  return workers_.size();
}

void SessionManager::shutdown() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_ && lanes_.empty() && !reaper_.joinable() && workers_.empty()) return;
    stopping_ = true;
  }
  queue_cv_.notify_all();
  reaper_cv_.notify_all();
  for (auto& t : lanes_) t.join();
  lanes_.clear();
  if (reaper_.joinable()) reaper_.join();

  std::vector<std::string> running;
  std::vector<std::shared_ptr<SessionChannel>> to_stop;
  {
    std::lock_guard lock(mutex_);
    for (const auto& id : queue_) settle(id, telemetry::Outcome::shutdown, "shutdown");
    queue_.clear();
    for (auto& [id, w] : workers_) {
      running.push_back(id);
      to_stop.push_back(w->channel);
    }
  }
  for (auto& ch : to_stop) ch->request_stop();
  for (const auto& id : running) {
    std::unique_lock lock(mutex_);
    reaper_cv_.wait(lock, [&] {
      return std::find(finished_.begin(), finished_.end(), id) != finished_.end() || !workers_.contains(id);
    });
  }
  collect_finished();
}

}  // namespace crowdnav::session
