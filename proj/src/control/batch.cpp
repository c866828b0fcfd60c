#include "crowdnav/control/batch.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/io_context.hpp>
#include <boost/asio/use_awaitable.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "crowdnav/random.hpp"

namespace crowdnav::control {

namespace asio = boost::asio;
using nlohmann::json;

std::vector<PolicyKind> parse_policy_mix(const std::string& spec, int users) {
  std::vector<PolicyKind> out;
  std::stringstream ss(spec);
  std::string item;
  std::vector<std::pair<PolicyKind, std::optional<int>>> parts;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    const auto kind = parse_policy(item.substr(0, colon));
    if (!kind) throw std::invalid_argument("unknown policy: " + item.substr(0, colon));
    std::optional<int> count;
    if (colon != std::string::npos) count = std::stoi(item.substr(colon + 1));
    parts.emplace_back(*kind, count);
  }
  if (parts.size() == 1 && !parts[0].second) return std::vector<PolicyKind>(static_cast<std::size_t>(users), parts[0].first);
  for (const auto& [kind, count] : parts) {
    if (!count || *count < 0) throw std::invalid_argument("policy mix needs a count for every entry");
    out.insert(out.end(), static_cast<std::size_t>(*count), kind);
  }
  if (static_cast<int>(out.size()) != users) throw std::invalid_argument("policy counts do not add up to the user count");
  return out;
}

namespace {

asio::awaitable<void> register_and_play(asio::io_context* io, Endpoint gateway, const std::vector<BotSpec>* specs,
                                        ScenarioCache* scenarios, std::vector<BotResult>* results) {
  for (std::size_t i = 0; i < specs->size(); ++i) {
    const SessionReply first = co_await request_session(gateway, (*specs)[i]);
    asio::co_spawn(*io, run_bot(gateway, (*specs)[i], first, *scenarios, (*results)[i]), asio::detached);
  }
}

}  // namespace

bool BatchReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const BatchCheck& c) { return c.passed; });
}

BatchReport run_batch(const BatchOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  BatchReport report;
  report.users.resize(static_cast<std::size_t>(options.users));
  std::vector<BotSpec> specs;
  for (int i = 0; i < options.users; ++i) {
    BotSpec s;
    s.user_id = fmt::format("{}{}u{:03}", options.user_prefix, options.seed, i);
    s.policy = options.policies.empty() ? PolicyKind::compliant : options.policies.at(static_cast<std::size_t>(i));
    s.seed = stable_hash(s.user_id, options.seed);
    s.scenario = options.scenario;
    s.trial = options.trial;
    specs.push_back(s);
  }

  asio::io_context io;
  ScenarioCache scenarios;
  asio::co_spawn(io, register_and_play(&io, options.gateway, &specs, &scenarios, &report.users), asio::detached);
  io.run();

  std::vector<telemetry::MetricsSummary> summaries;
  std::set<std::string> ids;
  bool unique = true;
  std::size_t admitted = 0, reported = 0, partial = 0;
  for (const auto& u : report.users) {
    if (u.status == "rejected") {
      ++report.rejected;
      continue;
    }
    ++admitted;
    if (!u.host_id.empty()) ++report.per_host[u.host_id];
    if (!u.session_id.empty() && !ids.insert(u.session_id).second) unique = false;
    if (u.summary) {
      ++reported;
      if (u.summary->partial) ++partial;
      summaries.push_back(*u.summary);
    }
  }
  if (!summaries.empty() && unique) report.aggregate = telemetry::aggregate(summaries);

  report.checks.push_back({"every admitted session has a summary", reported == admitted,
                           fmt::format("{}/{}", reported, admitted)});
  report.checks.push_back({"no partial summaries", partial == 0, fmt::format("{} partial", partial)});
  report.checks.push_back({"session ids unique", unique, ""});
  int lo = std::numeric_limits<int>::max(), hi = 0;
  for (const auto& [host, n] : report.per_host) {
    lo = std::min(lo, n);
    hi = std::max(hi, n);
  }
  report.checks.push_back({"round-robin balance", report.per_host.empty() || hi - lo <= 1,
                           fmt::format("min {} max {}", report.per_host.empty() ? 0 : lo, hi)});
  if (!options.data_dirs.empty() && report.aggregate) {
    bool same = false;
    std::string detail;
    try {
      std::vector<telemetry::MetricsSummary> on_disk;
      for (auto& s : telemetry::load_summaries(options.data_dirs))
        if (ids.contains(s.session_id)) on_disk.push_back(std::move(s));
      auto by_id = [](const auto& a, const auto& b) { return a.session_id < b.session_id; };
      auto fetched = summaries;
      std::sort(fetched.begin(), fetched.end(), by_id);
      std::sort(on_disk.begin(), on_disk.end(), by_id);
      same = fetched == on_disk &&
             telemetry::format_report_csv(telemetry::aggregate(on_disk)) == telemetry::format_report_csv(*report.aggregate);
      detail = fmt::format("{} files", on_disk.size());
    } catch (const std::exception& e) {
      detail = e.what();
    }
    report.checks.push_back({"aggregate equals stored summaries", same, detail});
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::string format_batch_report(const BatchReport& report) {
  std::string out = fmt::format("{:<16} {:<10} {:<26} {:<10} {:>8} {}\n", "user", "policy", "session", "status", "wall_s", "code");
  for (const auto& u : report.users)
    out += fmt::format("{:<16} {:<10} {:<26} {:<10} {:>8.1f} {}\n", u.spec.user_id, to_string(u.spec.policy),
                       u.session_id, u.status + (u.reason.empty() ? "" : "(" + u.reason + ")"), u.wall_seconds, u.code);
  out += "\nper host:";
  for (const auto& [host, n] : report.per_host) out += fmt::format(" {}={}", host, n);
  out += fmt::format("\nrejected: {}\nwall: {:.1f} s\n\n", report.rejected, report.wall_seconds);
  if (report.aggregate) out += telemetry::format_report_text(*report.aggregate) + "\n";
  for (const auto& c : report.checks)
    out += fmt::format("[{}] {}{}\n", c.passed ? "ok" : "FAIL", c.name, c.detail.empty() ? "" : " (" + c.detail + ")");
  return out;
}

std::string batch_report_json(const BatchReport& report) {
  json users = json::array();
  for (const auto& u : report.users)
    users.push_back({{"user_id", u.spec.user_id},
                     {"policy", to_string(u.spec.policy)},
                     {"session_id", u.session_id},
                     {"host", u.host_id},
                     {"status", u.status},
                     {"reason", u.reason},
                     {"code", u.code},
                     {"wall_seconds", u.wall_seconds},
                     {"completed", u.summary ? u.summary->completed : false}});
  json checks = json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  json j{{"users", users}, {"per_host", report.per_host}, {"rejected", report.rejected},
         {"wall_seconds", report.wall_seconds}, {"checks", checks}, {"ok", report.ok()}};
  if (report.aggregate) j["aggregate_csv"] = telemetry::format_report_csv(*report.aggregate);
  return j.dump(2) + "\n";
}

}  // namespace crowdnav::control
