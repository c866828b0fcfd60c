#include "crowdnav/control/client.hpp"

#include <chrono>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/use_awaitable.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

#include "crowdnav/net/http_util.hpp"
#include "crowdnav/session/protocol.hpp"

namespace crowdnav::control {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using asio::awaitable;
using asio::use_awaitable;
using asio::ip::tcp;
using nlohmann::json;

namespace {

std::chrono::milliseconds ms(double seconds) { return std::chrono::milliseconds(static_cast<long>(seconds * 1000)); }

awaitable<void> sleep_for(double seconds) {
  asio::steady_timer t(co_await asio::this_coro::executor);
  t.expires_after(ms(seconds));
  co_await t.async_wait(use_awaitable);
}

std::string host_of(const std::string& session_id) { return session_id.substr(0, session_id.find('.')); }

}  // namespace

awaitable<HttpReply> http_get(Endpoint endpoint, std::string target, double timeout_s) {
  HttpReply out;
  beast::tcp_stream stream(co_await asio::this_coro::executor);
  try {
    stream.expires_after(ms(timeout_s));
    co_await stream.async_connect(tcp::endpoint(asio::ip::make_address(endpoint.address), endpoint.port), use_awaitable);
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, endpoint.str());
    req.keep_alive(false);
    co_await http::async_write(stream, req, use_awaitable);
    beast::flat_buffer buf;
    http::response<http::string_body> res;
    co_await http::async_read(stream, buf, res, use_awaitable);
    out.status = static_cast<int>(res.result_int());
    out.body = res.body();
    for (const auto& f : res) {
      std::string name(f.name_string());
      for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.headers[name] = std::string(f.value());
    }
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
  } catch (const boost::system::system_error&) {
    out.status = 0;
  }
  co_return out;
}

namespace {

awaitable<void> http_get_into(Endpoint endpoint, std::string target, double timeout_s, HttpReply* out) {
  *out = co_await http_get(std::move(endpoint), std::move(target), timeout_s);
}

}  // namespace

HttpReply http_get_sync(const Endpoint& endpoint, const std::string& target, double timeout_s) {
  asio::io_context io;
  HttpReply out;
  asio::co_spawn(io, http_get_into(endpoint, target, timeout_s, &out), asio::detached);
  io.run();
  return out;
}

SessionReply parse_session_reply(const HttpReply& reply) {
  SessionReply s;
  s.status = reply.status;
  const json j = json::parse(reply.body, nullptr, false);
  if (j.is_object()) {
    s.session_id = j.value("session_id", "");
    s.realtime = j.value("realtime", "");
    s.reason = j.value("reason", j.value("status", ""));
    s.retry_after = j.value("retry_after", s.retry_after);
  }
  if (reply.status == 0) s.reason = "unreachable";
  return s;
}

awaitable<std::shared_ptr<const task::Scenario>> ScenarioCache::get(Endpoint gateway, std::string id, std::string user_id) {
  std::shared_ptr<const task::Scenario> found;
  if (cache_.contains(id)) found = cache_.at(id);
  if (found) co_return found;
  const net::QueryParams params{{"id", id}, {"user_id", user_id}};
  const std::string target = net::build_target("/scenario", params);
  const HttpReply reply = co_await http_get(gateway, target);
  if (reply.status != 200) throw std::runtime_error("scenario fetch failed: " + std::to_string(reply.status));
  if (!cache_.contains(id)) cache_[id] = std::make_shared<const task::Scenario>(session::decode_scenario(reply.body));
  found = cache_.at(id);
  co_return found;
}

awaitable<SessionReply> request_session(Endpoint gateway, BotSpec spec) {
  net::QueryParams params{{"user_id", spec.user_id}, {"trial", std::to_string(spec.trial)}};
  if (!spec.scenario.empty()) params.emplace_back("scenario", spec.scenario);
  const std::string target = net::build_target("/session", params);
  const HttpReply reply = co_await http_get(gateway, target);
  co_return parse_session_reply(reply);
}

awaitable<void> run_bot(Endpoint gateway, BotSpec spec, std::optional<SessionReply> first, ScenarioCache& scenarios,
                        BotResult& out) {
  const auto started = std::chrono::steady_clock::now();
  out.spec = spec;
  auto finish = [&](std::string status, std::string reason = {}) {
    out.status = std::move(status);
    out.reason = std::move(reason);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  try {
    SessionReply reply;
    if (first) reply = *first;
    else reply = co_await request_session(gateway, spec);
    int unreachable = 0;
    for (int attempt = 0; reply.status == 202 || reply.status == 503 || reply.status == 0; ++attempt) {
      if (reply.status != 202) ++unreachable;
      if (attempt > 2400 || unreachable > 30) {
        finish("error", "session never became ready");
        co_return;
      }
      co_await sleep_for(std::max(0.05, std::min(reply.retry_after, 1.0)));
      reply = co_await request_session(gateway, spec);
    }
    out.session_id = reply.session_id;
    out.host_id = host_of(reply.session_id);
    if (reply.status != 200) {
      finish("rejected", reply.reason);
      co_return;
    }

    websocket::stream<beast::tcp_stream> ws(co_await asio::this_coro::executor);
    beast::get_lowest_layer(ws).expires_after(std::chrono::seconds(10));
    co_await beast::get_lowest_layer(ws).async_connect(
        tcp::endpoint(asio::ip::make_address(gateway.address), gateway.port), use_awaitable);
    beast::get_lowest_layer(ws).socket().set_option(tcp::no_delay(true));
    co_await ws.async_handshake(gateway.str(), reply.realtime, use_awaitable);
    beast::get_lowest_layer(ws).expires_never();
    ws.text(true);

    beast::flat_buffer buf;
    std::unique_ptr<BotPolicy> policy;
    bool lockstep = false;
    std::optional<AvatarCommand> last_sent;
    double last_sent_at = -1e9;
    while (true) {
      buf.clear();
      co_await ws.async_read(buf, use_awaitable);
      const auto msg = session::decode_server(beast::buffers_to_string(buf.data()));
      if (!msg) continue;
      if (const auto* hello = std::get_if<session::HelloMessage>(&*msg)) {
        lockstep = hello->pacing == "lockstep";
        const auto scenario = co_await scenarios.get(gateway, hello->scenario_id, spec.user_id);
        policy = make_policy(spec.policy, *scenario, spec.seed);
      } else if (const auto* snap = std::get_if<session::SnapshotMessage>(&*msg)) {
        ++out.snapshots;
        if (!policy) continue;
        const AvatarCommand cmd = policy->decide(*snap);
        if (!lockstep && last_sent && *last_sent == cmd && snap->time - last_sent_at < 1.0) continue;
        session::KeysMessage keys{cmd, lockstep ? std::optional<std::uint64_t>(snap->tick) : std::nullopt};
        const std::string frame = session::encode_client(keys);
        co_await ws.async_write(asio::buffer(frame), use_awaitable);
        ++out.commands_sent;
        last_sent = cmd;
        last_sent_at = snap->time;
      } else if (const auto* end = std::get_if<session::EndMessage>(&*msg)) {
        out.code = end->code;
        out.status = end->outcome;
        break;
      }
    }
    beast::error_code ec;
    beast::get_lowest_layer(ws).socket().close(ec);

    const std::string status = out.status;
    for (int attempt = 0; attempt < 50; ++attempt) {
      const net::QueryParams params{{"session_id", out.session_id}, {"user_id", spec.user_id}};
      const std::string target = net::build_target("/summary", params);
      const HttpReply s = co_await http_get(gateway, target);
      if (s.status == 200) {
        out.summary = telemetry::decode_summary(s.body);
        break;
      }
      co_await sleep_for(0.1);
    }
    finish(status);
  } catch (const std::exception& e) {
    finish("error", e.what());
  }
}

}  // namespace crowdnav::control
