#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <boost/asio/awaitable.hpp>
#include <boost/asio/io_context.hpp>

#include "crowdnav/control/policy.hpp"
#include "crowdnav/task/scenario.hpp"
#include "crowdnav/telemetry/summary.hpp"

namespace crowdnav::control {

struct Endpoint {
  std::string address = "127.0.0.1";
  unsigned short port = 0;
  std::string str() const { return address + ":" + std::to_string(port); }
};

struct HttpReply {
  int status = 0;  // 0: transport failure
  std::string body;
  std::map<std::string, std::string> headers;  // lower-case names
};

/// One GET over a fresh connection. Transport failures yield status 0.
boost::asio::awaitable<HttpReply> http_get(Endpoint endpoint, std::string target, double timeout_s = 10.0);

/// Blocking convenience wrapper running its own io_context.
HttpReply http_get_sync(const Endpoint& endpoint, const std::string& target, double timeout_s = 10.0);

struct SessionReply {
  int status = 0;  // HTTP status of GET /session
  std::string session_id;
  std::string realtime;  // target of the realtime channel when running
  std::string reason;
  double retry_after = 0.25;
};

SessionReply parse_session_reply(const HttpReply& reply);

struct BotSpec {
  std::string user_id;
  PolicyKind policy = PolicyKind::compliant;
  std::uint64_t seed = 0;
  std::string scenario;  // empty: the user's trial sequence
  int trial = 0;
};

struct BotResult {
  BotSpec spec;
  std::string status;  // completed, expired, shutdown, failed, rejected, error
  std::string reason;
  std::string session_id;
  std::string host_id;
  std::string code;
  double wall_seconds = 0;
  std::size_t snapshots = 0;
  std::size_t commands_sent = 0;
  std::optional<telemetry::MetricsSummary> summary;
};

/// Scenario documents fetched once per id.
class ScenarioCache {
 public:
  boost::asio::awaitable<std::shared_ptr<const task::Scenario>> get(Endpoint gateway, std::string id, std::string user_id);

 private:
  std::map<std::string, std::shared_ptr<const task::Scenario>> cache_;
};

/// GET /session with the bot's parameters.
boost::asio::awaitable<SessionReply> request_session(Endpoint gateway, BotSpec spec);

/// Plays one session through the gateway using only the public protocol.
/// `first` is a reply already obtained (sequential registration).
boost::asio::awaitable<void> run_bot(Endpoint gateway, BotSpec spec, std::optional<SessionReply> first,
                                     ScenarioCache& scenarios, BotResult& out);

}  // namespace crowdnav::control
