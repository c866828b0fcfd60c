#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crowdnav/control/client.hpp"
#include "crowdnav/telemetry/aggregate.hpp"

namespace crowdnav::control {

/// "compliant", "compliant:29,idle:2", ... expanded to one policy per user.
/// Counts must sum to `users`; a single name without a count applies to all.
std::vector<PolicyKind> parse_policy_mix(const std::string& spec, int users);

struct BatchOptions {
  Endpoint gateway;
  int users = 1;
  std::string scenario;  // empty: each user's trial sequence
  int trial = 0;
  std::vector<PolicyKind> policies;  // one per user; empty means all compliant
  std::uint64_t seed = 1;
  std::string user_prefix = "bot";
  /// Host data directories; when given, the report is cross-checked against
  /// the summary files on disk.
  std::vector<std::filesystem::path> data_dirs;
};

struct BatchCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct BatchReport {
  std::vector<BotResult> users;
  std::optional<telemetry::CohortReport> aggregate;
  std::map<std::string, int> per_host;  // admitted sessions per host id
  std::size_t rejected = 0;
  std::vector<BatchCheck> checks;
  double wall_seconds = 0;

  bool ok() const;
};

/// Registers every user in order (so host assignment and session numbering
/// do not depend on timing), then plays all sessions concurrently.
BatchReport run_batch(const BatchOptions& options);

std::string format_batch_report(const BatchReport& report);
std::string batch_report_json(const BatchReport& report);

}  // namespace crowdnav::control
