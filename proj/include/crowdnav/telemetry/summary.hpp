#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdnav/telemetry/records.hpp"

namespace crowdnav::telemetry {

inline constexpr double kIntimateZone = 0.45;  // m
inline constexpr double kPersonalZone = 1.2;   // m
inline constexpr double kMoveEpsilon = 0.5;    // m

enum class Zone { intimate, personal, none };

/// Hall zone for a robot-avatar surface distance: [0, 0.45) intimate,
/// [0.45, 1.2) personal, otherwise none.
Zone classify_zone(double distance);

/// Centre distance minus both radii, floored at zero.
double surface_distance(const AgentSample& a, const AgentSample& b);

struct MetricsSummary {
  std::string session_id;
  std::string scenario_id;
  std::string user_id;
  std::optional<double> min_robot_distance;  // surface distance, metres
  bool intimate_incursion = false;
  bool personal_incursion = false;
  std::map<std::string, int> collisions;     // by pair kind
  int push_count = 0;
  double max_displacement = 0.0;             // avatar, from its first recorded pose
  bool moved = false;
  bool timed_out = false;
  bool robot_found = false;
  bool completed = false;                    // all three tasks done
  std::map<std::string, double> phase_times; // task -> sim time of completion
  Outcome outcome = Outcome::unknown;
  std::size_t tick_records = 0;
  bool partial = false;

  bool operator==(const MetricsSummary&) const = default;
};

/// Incremental summary over a record stream. Feeding the records of a log in
/// order and calling finish() is equivalent to summarize().
class SummaryBuilder {
 public:
  void add(const LogRecord& record);
  void mark_partial() { summary_.partial = true; }
  /// `outcome` overrides the log's end record when given.
  MetricsSummary finish(std::optional<Outcome> outcome = std::nullopt) const;

 private:
  MetricsSummary summary_;
  std::optional<std::uint64_t> last_tick_;
  std::optional<std::pair<double, double>> avatar_start_;
  bool saw_header_ = false;
  bool saw_end_ = false;
  bool end_degraded_ = false;
  Outcome end_outcome_ = Outcome::unknown;
};

/// Summary of a sequence of records. Records with non-increasing ticks are
/// skipped and mark the summary partial.
MetricsSummary summarize(const std::vector<LogRecord>& records, std::optional<Outcome> outcome = std::nullopt);

/// Reads and summarises a log file. Corrupt or truncated lines mark the
/// summary partial; parsing continues at the next line.
MetricsSummary summarize_log_file(const std::filesystem::path& log_path);

std::string encode_summary(const MetricsSummary& s);
MetricsSummary decode_summary(const std::string& text);

/// Writes {dir}/{session_id}.summary atomically (temp file + rename).
std::filesystem::path write_summary_file(const std::filesystem::path& dir, const MetricsSummary& s);
MetricsSummary read_summary_file(const std::filesystem::path& path);

/// Summarises every *.log in `dir` that has no *.summary (sessions whose
/// worker died); those summaries are marked partial. Returns the session ids.
std::vector<std::string> recover_orphan_logs(const std::filesystem::path& dir);

}  // namespace crowdnav::telemetry
