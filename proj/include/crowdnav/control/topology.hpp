#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <sys/types.h>

#include "crowdnav/control/client.hpp"
#include "crowdnav/session/config.hpp"

namespace crowdnav::control {

struct TopologyOptions {
  std::filesystem::path binary;    // the crowdnav executable
  std::filesystem::path work_dir;  // per-host data dirs and port files go here
  int hosts = 1;
  int max_sessions = 10;
  double time_limit = 300.0;
  session::Pacing pacing = session::Pacing::realtime;
  std::filesystem::path scenario_dir;  // empty: bundled scenarios
  double startup_timeout = 15.0;       // s
};

/// A gateway and N host processes on localhost, each bound to an ephemeral
/// port. Processes are terminated (SIGTERM, then SIGKILL) on destruction.
class LocalTopology {
 public:
  explicit LocalTopology(TopologyOptions options);
  ~LocalTopology();

  LocalTopology(const LocalTopology&) = delete;
  LocalTopology& operator=(const LocalTopology&) = delete;

  Endpoint gateway() const { return gateway_; }
  const std::vector<Endpoint>& hosts() const { return hosts_; }
  std::vector<std::filesystem::path> data_dirs() const;
  std::string host_id(int i) const { return "h" + std::to_string(i + 1); }

  /// Sends `signal` to host i and waits for it to exit.
  void kill_host(int i, int signal);
  /// SIGTERM to everything; waits for exit. Idempotent.
  void stop();

 private:
  pid_t spawn(const std::vector<std::string>& args, const std::filesystem::path& port_file, Endpoint& endpoint);

  TopologyOptions options_;
  Endpoint gateway_;
  std::vector<Endpoint> hosts_;
  std::vector<pid_t> host_pids_;
  pid_t gateway_pid_ = -1;
};

}  // namespace crowdnav::control
