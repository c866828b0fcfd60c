#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/telemetry/summary.hpp"

namespace crowdnav::telemetry {

struct Rate {
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  /// Percentage in [0, 100]; 0 for an empty denominator.
  double percent() const;
  bool operator==(const Rate&) const = default;
};

struct CohortGroup {
  std::size_t sessions = 0;
  Rate timeout;
  Rate no_movement;
  Rate intimate;
  Rate personal;
  Rate completed;
  Rate robot_found;
  Rate partial;
  std::size_t collisions = 0;
  std::size_t pushes = 0;
};

struct CohortReport {
  CohortGroup overall;
  std::map<std::string, CohortGroup> by_scenario;
};

/// Raised when two summaries share a session id.
class DuplicateSessionError : public std::runtime_error {
 public:
  DuplicateSessionError(const std::string& session_id, std::vector<std::string> sources);
  const std::string& session_id() const { return session_id_; }
  const std::vector<std::string>& sources() const { return sources_; }

 private:
  std::string session_id_;
  std::vector<std::string> sources_;
};

/// Throws std::invalid_argument for an empty input and DuplicateSessionError
/// for repeated session ids.
CohortReport aggregate(const std::vector<MetricsSummary>& summaries);

/// Reads every *.summary file below the given directories (one per host).
/// Duplicate session ids across files raise DuplicateSessionError naming both.
std::vector<MetricsSummary> load_summaries(const std::vector<std::filesystem::path>& dirs);

/// One row per group (overall first) with numerator, denominator and percent columns.
std::string format_report_csv(const CohortReport& report);
std::string format_report_text(const CohortReport& report);

}  // namespace crowdnav::telemetry
