// crowdnav: operator command line for hosts, the gateway, batches and data.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "crowdnav/control/batch.hpp"
#include "crowdnav/control/topology.hpp"
#include "crowdnav/gateway/server.hpp"
#include "crowdnav/net/host_server.hpp"
#include "crowdnav/net/http_util.hpp"
#include "crowdnav/session/manager.hpp"
#include "crowdnav/task/scenario.hpp"
#include "crowdnav/telemetry/aggregate.hpp"
#include "crowdnav/telemetry/summary.hpp"

namespace fs = std::filesystem;
using namespace crowdnav;

namespace {

void write_port_file(const fs::path& path, unsigned short port) {
  if (path.empty()) return;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << port << "\n";
  }
  fs::rename(tmp, path);
}

struct HostArgs {
  std::string config, host_id, bind, data_dir, scenario_dir, pacing, port_file;
  int port = -1, max_sessions = -1;
  double time_limit = -1;
};

int serve_host(const HostArgs& a) {
  session::HostConfig cfg = session::load_host_config(a.config);
  if (!a.host_id.empty()) cfg.host_id = a.host_id;
  if (!a.bind.empty()) cfg.bind_address = a.bind;
  if (a.port >= 0) cfg.port = static_cast<unsigned short>(a.port);
  if (!a.data_dir.empty()) cfg.data_dir = a.data_dir;
  if (!a.scenario_dir.empty()) cfg.scenario_dir = a.scenario_dir;
  if (a.max_sessions >= 0) cfg.max_sessions = a.max_sessions;
  if (a.time_limit > 0) cfg.time_limit = a.time_limit;
  if (!a.pacing.empty()) {
    const auto p = session::parse_pacing(a.pacing);
    if (!p) throw session::ConfigError("pacing must be realtime or lockstep");
    cfg.pacing = *p;
  }
  cfg.validate();
  const fs::path scenario_dir = cfg.scenario_dir.empty() ? session::bundled_asset_dir() / "scenarios" : cfg.scenario_dir;
  auto catalog = task::ScenarioCatalog::load_dir(scenario_dir);
  if (fs::is_directory(cfg.data_dir)) {
    for (const auto& id : telemetry::recover_orphan_logs(cfg.data_dir))
      spdlog::warn("recovered partial session {}", id);
  }

  session::SessionManager manager(cfg, std::move(catalog));
  boost::asio::io_context io;
  net::HostServer server(io, manager, cfg.bind_address, cfg.port);
  server.start();
  write_port_file(a.port_file, server.port());
  spdlog::info("host {} listening on {}:{} (capacity {}, time limit {} s, {})", cfg.host_id, cfg.bind_address,
               server.port(), cfg.max_sessions, cfg.time_limit, session::to_string(cfg.pacing));

  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  boost::asio::steady_timer grace(io);
  signals.async_wait([&](const boost::system::error_code&, int) {
    spdlog::info("host {} shutting down", cfg.host_id);
    server.stop();
    manager.shutdown();
    grace.expires_after(std::chrono::milliseconds(200));
    grace.async_wait([&](const boost::system::error_code&) { io.stop(); });
  });
  io.run();
  return 0;
}

struct GatewayArgs {
  std::string config, hosts, bind, port_file;
  int port = -1;
  double sticky_window = -1;
};

int serve_gateway(const GatewayArgs& a) {
  session::GatewayConfig cfg;
  {
    // Hosts may come only from the command line; validate after merging.
    auto env = [&](const std::string& name) -> std::optional<std::string> {
      if (name == "CROWDNAV_GATEWAY_HOSTS" && !a.hosts.empty()) return a.hosts;
      return session::process_env(name);
    };
    cfg = session::load_gateway_config(a.config, env);
  }
  if (!a.bind.empty()) cfg.bind_address = a.bind;
  if (a.port >= 0) cfg.port = static_cast<unsigned short>(a.port);
  if (a.sticky_window > 0) cfg.sticky_window = a.sticky_window;
  cfg.validate();

  boost::asio::io_context io;
  gateway::GatewayServer server(io, cfg);
  server.start();
  write_port_file(a.port_file, server.port());
  spdlog::info("gateway listening on {}:{} with {} host(s)", cfg.bind_address, server.port(), cfg.hosts.size());
  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) {
    server.stop();
    io.stop();
  });
  io.run();
  return 0;
}

struct BatchArgs {
  std::string gateway, scenario, policy = "compliant", pacing = "realtime", report_json, work_dir;
  int users = 1, trial = 0, spawn_hosts = 0, max_sessions = 10;
  std::uint64_t seed = 1;
  double time_limit = 300;
};

int run_batch_cmd(const BatchArgs& a) {
  control::BatchOptions opts;
  opts.users = a.users;
  opts.scenario = a.scenario;
  opts.trial = a.trial;
  opts.seed = a.seed;
  opts.policies = control::parse_policy_mix(a.policy, a.users);

  std::unique_ptr<control::LocalTopology> topo;
  if (a.spawn_hosts > 0) {
    control::TopologyOptions t;
    t.binary = fs::read_symlink("/proc/self/exe");
    t.work_dir = a.work_dir.empty() ? fs::temp_directory_path() / fmt::format("crowdnav-batch-{}", ::getpid()) : fs::path(a.work_dir);
    t.hosts = a.spawn_hosts;
    t.max_sessions = a.max_sessions;
    t.time_limit = a.time_limit;
    const auto p = session::parse_pacing(a.pacing);
    if (!p) throw session::ConfigError("pacing must be realtime or lockstep");
    t.pacing = *p;
    topo = std::make_unique<control::LocalTopology>(t);
    opts.gateway = topo->gateway();
    opts.data_dirs = topo->data_dirs();
    spdlog::info("spawned {} host(s) and a gateway on port {} under {}", a.spawn_hosts, opts.gateway.port, t.work_dir.string());
  } else {
    const auto ep = net::split_endpoint(a.gateway);
    if (!ep) throw std::invalid_argument("--gateway must be address:port (or use --spawn-hosts)");
    opts.gateway = control::Endpoint{ep->first, ep->second};
  }

  const auto report = control::run_batch(opts);
  std::cout << control::format_batch_report(report);
  if (!a.report_json.empty()) {
    std::ofstream out(a.report_json);
    out << control::batch_report_json(report);
  }
  if (topo) topo->stop();
  return report.ok() ? 0 : 1;
}

int lint_cmd(const std::vector<std::string>& files) {
  int failures = 0;
  for (const auto& f : files) {
    try {
      const auto s = task::load_scenario(f);
      const auto violations = task::validate_scenario(s, *s.map);
      if (violations.empty()) {
        std::cout << f << ": ok\n";
      } else {
        ++failures;
        for (const auto& v : violations) std::cout << f << ": " << v << "\n";
      }
    } catch (const task::ScenarioError& e) {
      ++failures;
      std::cout << f << ": error: " << e.what() << "\n";
    }
  }
  return failures == 0 ? 0 : 1;
}

int aggregate_cmd(const std::vector<std::string>& dirs, const std::string& csv) {
  std::vector<fs::path> paths(dirs.begin(), dirs.end());
  try {
    const auto summaries = telemetry::load_summaries(paths);
    if (summaries.empty()) {
      std::cerr << "no summaries found\n";
      return 1;
    }
    const auto report = telemetry::aggregate(summaries);
    std::cout << telemetry::format_report_text(report);
    if (!csv.empty()) {
      std::ofstream out(csv);
      out << telemetry::format_report_csv(report);
    }
  } catch (const telemetry::DuplicateSessionError& e) {
    std::cerr << "conflict: session " << e.session_id() << " appears in";
    for (const auto& s : e.sources()) std::cerr << " " << s;
    std::cerr << "\n";
    return 2;
  }
  return 0;
}

int replay_cmd(const std::string& log, int every) {
  const auto parsed = telemetry::read_log(log);
  for (const auto& rec : parsed.records) {
    if (const auto* h = std::get_if<telemetry::HeaderRecord>(&rec)) {
      std::cout << fmt::format("session {} scenario {} host {} user {} dt {}\n", h->session_id, h->scenario_id,
                               h->host_id, h->user_id, h->dt);
    } else if (const auto* t = std::get_if<telemetry::TickRecord>(&rec)) {
      if (every <= 0 || t->tick % static_cast<std::uint64_t>(every) != 0) continue;
      std::string line = fmt::format("t={:7.2f} {:<15}", t->sim_time, t->phase);
      const telemetry::AgentSample* av = nullptr;
      const telemetry::AgentSample* rb = nullptr;
      for (const auto& a : t->agents) {
        if (a.kind == AgentKind::avatar) av = &a;
        if (a.kind == AgentKind::robot) rb = &a;
      }
      if (av) line += fmt::format(" avatar ({:6.2f},{:6.2f})", av->x, av->y);
      if (rb) line += fmt::format(" robot ({:6.2f},{:6.2f})", rb->x, rb->y);
      if (av && rb) line += fmt::format(" gap {:5.2f}", telemetry::surface_distance(*av, *rb));
      std::cout << line << "\n";
    } else if (const auto* e = std::get_if<telemetry::EventRecord>(&rec)) {
      std::cout << fmt::format("t={:7.2f} event {}{}{}\n", e->sim_time, e->kind,
                               e->pair_kind.empty() ? "" : " " + e->pair_kind + (e->push ? " push" : ""),
                               e->completed.empty() ? "" : " " + e->completed + " -> " + e->next);
    } else if (const auto* end = std::get_if<telemetry::EndRecord>(&rec)) {
      std::cout << fmt::format("t={:7.2f} end {}{}\n", end->sim_time, telemetry::to_string(end->outcome),
                               end->degraded ? " (degraded)" : "");
    }
  }
  const auto summary = telemetry::summarize_log_file(log);
  std::cout << telemetry::encode_summary(summary);
  if (parsed.corrupt_lines || parsed.truncated_tail)
    std::cout << fmt::format("{} corrupt line(s){}\n", parsed.corrupt_lines, parsed.truncated_tail ? ", truncated tail" : "");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdnav: crowdsourced human-robot navigation sessions"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "run a host or the gateway");
  serve->require_subcommand(1);
  HostArgs host;
  auto* host_cmd = serve->add_subcommand("host", "session host");
  host_cmd->add_option("--config", host.config, "YAML config file (host: section)");
  host_cmd->add_option("--host-id", host.host_id);
  host_cmd->add_option("--bind", host.bind);
  host_cmd->add_option("--port", host.port, "0 picks a free port");
  host_cmd->add_option("--port-file", host.port_file, "write the bound port here");
  host_cmd->add_option("--data-dir", host.data_dir);
  host_cmd->add_option("--scenario-dir", host.scenario_dir);
  host_cmd->add_option("--max-sessions", host.max_sessions);
  host_cmd->add_option("--time-limit", host.time_limit, "seconds");
  host_cmd->add_option("--pacing", host.pacing, "realtime or lockstep");

  GatewayArgs gw;
  auto* gw_cmd = serve->add_subcommand("gateway", "sticky load balancer");
  gw_cmd->add_option("--config", gw.config, "YAML config file (gateway: section)");
  gw_cmd->add_option("--hosts", gw.hosts, "comma-separated address:port list");
  gw_cmd->add_option("--bind", gw.bind);
  gw_cmd->add_option("--port", gw.port, "0 picks a free port");
  gw_cmd->add_option("--port-file", gw.port_file);
  gw_cmd->add_option("--sticky-window", gw.sticky_window, "seconds");

  BatchArgs batch;
  auto* batch_cmd = app.add_subcommand("batch", "run headless participants");
  batch_cmd->add_option("--gateway", batch.gateway, "address:port of a running gateway");
  batch_cmd->add_option("--spawn-hosts", batch.spawn_hosts, "start N local hosts and a gateway");
  batch_cmd->add_option("--max-sessions", batch.max_sessions, "per spawned host")->capture_default_str();
  batch_cmd->add_option("--time-limit", batch.time_limit, "seconds, spawned hosts")->capture_default_str();
  batch_cmd->add_option("--pacing", batch.pacing, "spawned hosts: realtime or lockstep")->capture_default_str();
  batch_cmd->add_option("--work-dir", batch.work_dir, "spawned hosts' files");
  batch_cmd->add_option("--users", batch.users)->capture_default_str();
  batch_cmd->add_option("--scenario", batch.scenario, "scenario id (default: each user's trial sequence)");
  batch_cmd->add_option("--trial", batch.trial)->capture_default_str();
  batch_cmd->add_option("--policy", batch.policy, "e.g. compliant or compliant:29,idle:2")->capture_default_str();
  batch_cmd->add_option("--seed", batch.seed)->capture_default_str();
  batch_cmd->add_option("--report-json", batch.report_json);

  std::vector<std::string> lint_files;
  auto* lint = app.add_subcommand("lint", "validate scenario files");
  lint->add_option("files", lint_files)->required();

  std::vector<std::string> agg_dirs;
  std::string agg_csv;
  auto* agg = app.add_subcommand("aggregate", "cohort report over summary files");
  agg->add_option("dirs", agg_dirs, "data directories (one per host)")->required();
  agg->add_option("--csv", agg_csv, "also write the table here");

  std::string replay_log;
  int replay_every = 20;
  auto* replay = app.add_subcommand("replay", "print a session log");
  replay->add_option("log", replay_log)->required();
  replay->add_option("--every", replay_every, "print every Nth tick (0: none)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (host_cmd->parsed()) return serve_host(host);
    if (gw_cmd->parsed()) return serve_gateway(gw);
    if (batch_cmd->parsed()) return run_batch_cmd(batch);
    if (lint->parsed()) return lint_cmd(lint_files);
    if (agg->parsed()) return aggregate_cmd(agg_dirs, agg_csv);
    if (replay->parsed()) return replay_cmd(replay_log, replay_every);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
