#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crowdnav/agent.hpp"

namespace crowdnav::telemetry {

inline constexpr const char* kLogSchema = "crowdnav.log/1";

/// How a session ended.
enum class Outcome : std::uint8_t { completed, expired, shutdown, failed, unknown };

std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

struct HeaderRecord {
  std::string session_id;
  std::string scenario_id;
  std::string host_id;
  std::string user_id;
  double dt = 0.05;
  int decimation = 1;
  std::string wall_start;  // ISO-8601, informational only
  std::optional<Vec2> avatar_start;

  bool operator==(const HeaderRecord&) const = default;
};

struct AgentSample {
  int id = 0;
  AgentKind kind = AgentKind::npc;
  double x = 0, y = 0, theta = 0;
  double vx = 0, vy = 0;
  double radius = 0.3;

  bool operator==(const AgentSample&) const = default;
};

struct TickRecord {
  std::uint64_t tick = 0;
  double sim_time = 0.0;
  std::string phase;
  std::vector<AgentSample> agents;
  std::vector<double> lidar;  // empty on ticks without a scan

  bool operator==(const TickRecord&) const = default;
};

/// Something that happened during a tick: collision, phase change, goal, ...
struct EventRecord {
  std::uint64_t tick = 0;
  double sim_time = 0.0;
  std::string kind;       // "collision", "phase", "goal_reached", "nav_failed", "waypoint_reached"
  int agent = -1;
  int other = -1;
  std::string pair_kind;  // collisions
  bool push = false;
  std::string completed;  // phase events
  std::string next;

  bool operator==(const EventRecord&) const = default;
};

struct EndRecord {
  std::uint64_t tick = 0;
  double sim_time = 0.0;
  Outcome outcome = Outcome::unknown;
  bool degraded = false;

  bool operator==(const EndRecord&) const = default;
};

using LogRecord = std::variant<HeaderRecord, TickRecord, EventRecord, EndRecord>;

/// One JSON object, no trailing newline.
std::string encode(const LogRecord& record);

/// Parses one line; nullopt for malformed or unknown records.
std::optional<LogRecord> decode(std::string_view line);

/// Result of reading a whole log: every complete, parseable line in order.
struct ParsedLog {
  std::vector<LogRecord> records;
  std::size_t corrupt_lines = 0;   // complete lines that failed to parse
  bool truncated_tail = false;     // final line had no newline
};

ParsedLog parse_log(std::string_view contents);
ParsedLog read_log(const std::string& path);

}  // namespace crowdnav::telemetry
