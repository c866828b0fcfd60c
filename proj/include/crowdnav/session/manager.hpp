#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "crowdnav/session/channel.hpp"
#include "crowdnav/session/config.hpp"
#include "crowdnav/task/scenario.hpp"
#include "crowdnav/telemetry/records.hpp"

namespace crowdnav::session {

using Clock = std::chrono::steady_clock;

enum class SessionState { queued, launching, running, expired, closed };

std::string_view to_string(SessionState s);
inline bool is_terminal(SessionState s) { return s == SessionState::expired || s == SessionState::closed; }

/// Parameters a client may pass to GET /session. Anything else is rejected.
inline constexpr const char* kAllowedParams[] = {"user_id",     "scenario",    "trial",     "avatar_start",
                                                 "avatar_goal", "robot_start", "robot_goal"};

struct LaunchRequest {
  std::string user_id;
  std::string scenario_id;  // empty: chosen from the user's trial sequence
  int trial = 0;
  std::optional<Pose2D> avatar_start, avatar_goal, robot_start, robot_goal;
};

/// Validates raw query parameters against the allowlist and the value
/// formats. Returns the request or a bad_request reason.
std::variant<LaunchRequest, std::string> parse_launch_request(
    const std::vector<std::pair<std::string, std::string>>& params);

struct SessionOutcome {
  enum class Kind { attach, pending, rejected } kind = Kind::rejected;
  std::string session_id;
  std::string reason;      // rejected: "capacity" or "bad_request"
  std::string detail;
  double retry_after = 0;  // s
};

struct SessionInfo {
  std::string session_id;
  std::string user_id;
  std::string host_id;
  std::string scenario_id;
  int trial = 0;
  SessionState state = SessionState::queued;
  Clock::time_point created_at{};
  Clock::time_point deadline{};
  std::optional<Clock::time_point> launched_at;
  std::uint64_t launch_seq = 0;  // order in which launches started, from 1
  std::string close_reason;      // "completed", "io_failure", "shutdown", ...
  telemetry::Outcome outcome = telemetry::Outcome::unknown;
};

struct HostStatus {
  std::string host_id;
  int running = 0;
  int queued = 0;
  int launching = 0;
  int capacity = 0;
  std::size_t live_workers = 0;
  std::vector<SessionInfo> sessions;
};

/// Per-host session authority: admission, FIFO launch lanes, one worker
/// thread per running session, and the deadline reaper. All record state
/// changes happen under one mutex; workers only report completion.
class SessionManager {
 public:
  struct Options {
    bool background = true;  // launch lanes + reaper threads
    std::function<Clock::time_point()> now = [] { return Clock::now(); };
  };

  SessionManager(HostConfig config, task::ScenarioCatalog catalog);
  SessionManager(HostConfig config, task::ScenarioCatalog catalog, Options options);
  ~SessionManager();

  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  SessionOutcome handle_session_request(const LaunchRequest& req);

  /// Launches the oldest queued record on the calling thread. Returns its id,
  /// or nullopt when nothing is queued. Used by the lanes and by tests.
  std::optional<std::string> launch_next();

  /// Expires every launching/running session whose deadline is <= now and
  /// joins its worker. Also collects workers that finished on their own.
  std::vector<std::string> reap_expired(Clock::time_point now);

  /// Joins workers that finished on their own and settles their records.
  std::vector<std::string> collect_finished();

  HostStatus host_status() const;
  std::optional<SessionInfo> session(const std::string& session_id) const;
  std::shared_ptr<SessionChannel> channel(const std::string& session_id) const;
  std::size_t live_workers() const;

  /// Stops everything; running sessions end with outcome "shutdown" and
  /// finalized telemetry. Idempotent.
  void shutdown();

  const HostConfig& config() const { return config_; }
  const task::ScenarioCatalog& catalog() const { return catalog_; }
  Clock::time_point now() const { return options_.now(); }

 private:
  struct Worker;
  struct Record {
    SessionInfo info;
    std::shared_ptr<const task::Scenario> scenario;
    std::uint64_t seed = 0;
    std::shared_ptr<SessionChannel> channel;
  };

  void lane_loop();
  void reaper_loop();
  void worker_main(const std::string& id, Worker* worker);
  void worker_done(const std::string& id);
  void settle(const std::string& id, telemetry::Outcome outcome, const std::string& reason);
  std::variant<std::shared_ptr<const task::Scenario>, std::string> resolve_scenario(const LaunchRequest& req) const;

  HostConfig config_;
  task::ScenarioCatalog catalog_;
  Options options_;

  mutable std::mutex mutex_;
  std::condition_variable queue_cv_;
  std::condition_variable reaper_cv_;
  std::map<std::string, Record> records_;
  std::map<std::string, std::string> active_by_user_;
  std::deque<std::string> queue_;
  std::map<std::string, std::unique_ptr<Worker>> workers_;
  std::vector<std::string> finished_;
  std::uint64_t next_session_ = 1;
  std::uint64_t next_launch_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> lanes_;
  std::thread reaper_;
};

}  // namespace crowdnav::session
