#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdnav::session {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pacing { realtime, lockstep };

std::string_view to_string(Pacing p);
std::optional<Pacing> parse_pacing(std::string_view text);

struct HostConfig {
  std::string host_id = "host";
  std::string bind_address = "127.0.0.1";
  unsigned short port = 8101;
  int max_sessions = 10;
  double time_limit = 300.0;  // s, applies to every session on this host
  std::filesystem::path data_dir = "data";
  std::filesystem::path scenario_dir;  // empty: the bundled scenarios
  int launch_lanes = 2;
  double reap_period = 0.5;      // s; 0 disables the background reaper
  Pacing pacing = Pacing::realtime;
  double tick_rate = 20.0;       // Hz, realtime pacing
  int snapshot_every = 2;        // ticks between snapshots, realtime pacing
  int decimation = 1;            // telemetry
  int lidar_every = 10;
  /// Lockstep sessions advance only when the client acknowledges, so their
  /// wall-clock deadline is time_limit * this factor (abandonment guard).
  double lockstep_wall_factor = 10.0;
  double retry_after = 5.0;      // s, hint sent with capacity rejections

  void validate() const;
};

struct GatewayConfig {
  std::string bind_address = "127.0.0.1";
  unsigned short port = 8100;
  std::vector<std::string> hosts;  // "address:port"
  double sticky_window = 7200.0;   // s
  double health_period = 1.0;      // s
  double health_timeout = 1.0;     // s
  int down_after = 2;              // consecutive probe failures
  int up_after = 1;                // consecutive probe successes

  void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
std::optional<std::string> process_env(const std::string& name);

/// Loads the `host:` section of a config file (empty path: defaults), then
/// applies CROWDNAV_* environment overrides. Throws ConfigError.
HostConfig load_host_config(const std::filesystem::path& path, const EnvLookup& env = process_env);
GatewayConfig load_gateway_config(const std::filesystem::path& path, const EnvLookup& env = process_env);

HostConfig parse_host_config(const std::string& yaml_text, const EnvLookup& env = process_env);
GatewayConfig parse_gateway_config(const std::string& yaml_text, const EnvLookup& env = process_env);

/// Directory of the scenarios shipped with the source tree.
std::filesystem::path bundled_asset_dir();

}  // namespace crowdnav::session
