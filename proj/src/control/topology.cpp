#include "crowdnav/control/topology.hpp"

#include <chrono>
#include <csignal>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace crowdnav::control {

namespace {

void wait_exit(pid_t pid, double timeout_s) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(static_cast<long>(timeout_s * 1000));
  while (std::chrono::steady_clock::now() < deadline) {
    int status = 0;
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid || r < 0) return;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::kill(pid, SIGKILL);
  int status = 0;
  ::waitpid(pid, &status, 0);
}

}  // namespace

LocalTopology::LocalTopology(TopologyOptions options) : options_(std::move(options)) {
  std::filesystem::create_directories(options_.work_dir);
  try {
    std::vector<std::string> endpoints;
    for (int i = 0; i < options_.hosts; ++i) {
      const auto dir = options_.work_dir / host_id(i);
      std::filesystem::create_directories(dir);
      std::vector<std::string> args{options_.binary.string(), "serve",           "host",
                                    "--host-id",              host_id(i),        "--port",
                                    "0",                      "--data-dir",      (dir / "data").string(),
                                    "--max-sessions",         std::to_string(options_.max_sessions),
                                    "--time-limit",           std::to_string(options_.time_limit),
                                    "--pacing",               std::string(session::to_string(options_.pacing))};
      if (!options_.scenario_dir.empty()) {
        args.push_back("--scenario-dir");
        args.push_back(options_.scenario_dir.string());
      }
      Endpoint ep;
      host_pids_.push_back(spawn(args, dir / "port", ep));
      hosts_.push_back(ep);
      endpoints.push_back(ep.str());
    }
    std::string list;
    for (const auto& e : endpoints) list += (list.empty() ? "" : ",") + e;
    std::vector<std::string> args{options_.binary.string(), "serve", "gateway", "--port", "0", "--hosts", list};
    gateway_pid_ = spawn(args, options_.work_dir / "gateway.port", gateway_);
  } catch (...) {
    stop();
    throw;
  }
}

LocalTopology::~LocalTopology() { stop(); }

pid_t LocalTopology::spawn(const std::vector<std::string>& args, const std::filesystem::path& port_file, Endpoint& endpoint) {
  std::filesystem::remove(port_file);
  std::vector<std::string> full = args;
  full.push_back("--port-file");
  full.push_back(port_file.string());
  std::vector<char*> argv;
  for (auto& a : full) argv.push_back(a.data());
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    ::prctl(PR_SET_PDEATHSIG, SIGTERM);
    ::execv(argv[0], argv.data());
    ::_exit(127);
  }
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(static_cast<long>(options_.startup_timeout * 1000));
  while (std::chrono::steady_clock::now() < deadline) {
    std::ifstream in(port_file);
    unsigned port = 0;
    if (in >> port && port > 0) {
      endpoint = {"127.0.0.1", static_cast<unsigned short>(port)};
      return pid;
    }
    int status = 0;
    if (::waitpid(pid, &status, WNOHANG) == pid) throw std::runtime_error("process exited during startup: " + args[0]);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ::kill(pid, SIGKILL);
  ::waitpid(pid, nullptr, 0);
  throw std::runtime_error("process did not report its port: " + port_file.string());
}

std::vector<std::filesystem::path> LocalTopology::data_dirs() const {
  std::vector<std::filesystem::path> out;
  for (int i = 0; i < options_.hosts; ++i) out.push_back(options_.work_dir / host_id(i) / "data");
  return out;
}

void LocalTopology::kill_host(int i, int signal) {
  pid_t& pid = host_pids_.at(static_cast<std::size_t>(i));
  if (pid <= 0) return;
  ::kill(pid, signal);
  wait_exit(pid, 10.0);
  pid = -1;
}

void LocalTopology::stop() {
  if (gateway_pid_ > 0) {
    ::kill(gateway_pid_, SIGTERM);
    wait_exit(gateway_pid_, 5.0);
    gateway_pid_ = -1;
  }
  for (pid_t& pid : host_pids_) {
    if (pid <= 0) continue;
    ::kill(pid, SIGTERM);
  }
  for (pid_t& pid : host_pids_) {
    if (pid <= 0) continue;
    wait_exit(pid, 15.0);
    pid = -1;
  }
}

}  // namespace crowdnav::control
