#include "crowdnav/net/host_server.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/use_awaitable.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "crowdnav/net/http_util.hpp"
#include "crowdnav/session/protocol.hpp"
#include "crowdnav/telemetry/summary.hpp"

namespace crowdnav::net {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using asio::awaitable;
using asio::use_awaitable;
using asio::ip::tcp;
using nlohmann::json;
using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

namespace {

Response json_response(const Request& req, http::status status, const json& body) {
  Response res{status, req.version()};
  res.set(http::field::server, "crowdnav-host");
  res.set(http::field::content_type, "application/json");
  res.set(http::field::cache_control, "no-store");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

Response error_response(const Request& req, http::status status, const std::string& reason) {
  return json_response(req, status, {{"status", "error"}, {"reason", reason}});
}

json session_json(const session::SessionInfo& s, session::Clock::time_point now) {
  const double left = std::chrono::duration<double>(s.deadline - now).count();
  return {{"session_id", s.session_id}, {"user_id", s.user_id},     {"scenario", s.scenario_id},
          {"trial", s.trial},           {"state", to_string(s.state)}, {"deadline_in", std::max(0.0, left)},
          {"launch_seq", s.launch_seq}, {"close_reason", s.close_reason},
          {"outcome", telemetry::to_string(s.outcome)}};
}

}  // namespace

struct HostServer::Impl : std::enable_shared_from_this<Impl> {
  asio::io_context& io;
  session::SessionManager& manager;
  tcp::acceptor acceptor;

  Impl(asio::io_context& io_, session::SessionManager& m, const std::string& address, unsigned short port)
      : io(io_), manager(m), acceptor(io_) {
    const tcp::endpoint ep(asio::ip::make_address(address), port);
    acceptor.open(ep.protocol());
    acceptor.set_option(asio::socket_base::reuse_address(true));
    acceptor.bind(ep);
    acceptor.listen();
  }

  awaitable<void> accept_loop() {
    auto self = shared_from_this();
    while (acceptor.is_open()) {
      tcp::socket socket(io);
      try {
        co_await acceptor.async_accept(socket, use_awaitable);
      } catch (const boost::system::system_error& e) {
        if (!acceptor.is_open()) co_return;
        spdlog::warn("accept: {}", e.what());
        continue;
      }
      socket.set_option(tcp::no_delay(true));
      asio::co_spawn(io, serve(std::move(socket)), asio::detached);
    }
  }

  awaitable<void> serve(tcp::socket socket) {
    auto self = shared_from_this();
    beast::tcp_stream stream(std::move(socket));
    beast::flat_buffer buffer;
    try {
      while (true) {
        Request req;
        stream.expires_after(std::chrono::seconds(60));
        co_await http::async_read(stream, buffer, req, use_awaitable);
        stream.expires_never();
        const auto target = parse_target(std::string(req.target()));
        if (target && target->path == "/rt" && websocket::is_upgrade(req)) {
          co_await realtime(std::move(stream), std::move(req), *target);
          co_return;
        }
        Response res = target ? handle(req, *target) : error_response(req, http::status::bad_request, "bad_request");
        const bool keep = res.keep_alive();
        co_await http::async_write(stream, res, use_awaitable);
        if (!keep) break;
      }
      beast::error_code ec;
      stream.socket().shutdown(tcp::socket::shutdown_send, ec);
    } catch (const boost::system::system_error&) {
      // Peer went away.
    }
  }

  Response handle(const Request& req, const Target& target) {
    if (req.method() != http::verb::get) return error_response(req, http::status::method_not_allowed, "method");
    if (target.path == "/session") return handle_session(req, target);
    if (target.path == "/status") return handle_status(req);
    if (target.path == "/scenario") {
      const auto id = param(target.params, "id");
      const task::Scenario* s = id ? manager.catalog().find(*id) : nullptr;
      if (!s) return error_response(req, http::status::not_found, "unknown scenario");
      task::Scenario copy = *s;
      copy.time_limit = manager.config().time_limit;
      Response res = json_response(req, http::status::ok, json::parse(session::encode_scenario(copy)));
      return res;
    }
    if (target.path == "/summary") {
      const auto id = param(target.params, "session_id");
      if (!id || !manager.session(*id)) return error_response(req, http::status::not_found, "unknown session");
      const auto path = manager.config().data_dir / (*id + ".summary");
      std::ifstream in(path);
      if (!in) return error_response(req, http::status::not_found, "summary not ready");
      std::stringstream buf;
      buf << in.rdbuf();
      Response res{http::status::ok, req.version()};
      res.set(http::field::content_type, "application/json");
      res.keep_alive(req.keep_alive());
      res.body() = buf.str();
      res.prepare_payload();
      return res;
    }
    return error_response(req, http::status::not_found, "not_found");
  }

  Response handle_session(const Request& req, const Target& target) {
    const auto parsed = session::parse_launch_request(target.params);
    if (const auto* err = std::get_if<std::string>(&parsed))
      return json_response(req, http::status::bad_request,
                           {{"status", "rejected"}, {"reason", "bad_request"}, {"detail", *err}});
    const auto& launch = std::get<session::LaunchRequest>(parsed);
    const auto out = manager.handle_session_request(launch);
    using Kind = session::SessionOutcome::Kind;
    if (out.kind == Kind::attach) {
      const std::string rt = build_target("/rt", {{"session_id", out.session_id}, {"user_id", launch.user_id}});
      return json_response(req, http::status::ok, {{"status", "running"}, {"session_id", out.session_id}, {"realtime", rt}});
    }
    if (out.kind == Kind::pending)
      return json_response(req, http::status::accepted,
                           {{"status", "pending"}, {"session_id", out.session_id}, {"retry_after", 0.25}});
    if (out.reason == "capacity") {
      Response res = json_response(req, http::status::too_many_requests,
                                   {{"status", "rejected"}, {"reason", "capacity"}, {"retry_after", out.retry_after}});
      res.set(http::field::retry_after, std::to_string(static_cast<long>(std::ceil(out.retry_after))));
      return res;
    }
    return json_response(req, http::status::bad_request,
                         {{"status", "rejected"}, {"reason", out.reason}, {"detail", out.detail}});
  }

  Response handle_status(const Request& req) {
    const auto st = manager.host_status();
    const auto now = manager.now();
    json sessions = json::array();
    for (const auto& s : st.sessions) sessions.push_back(session_json(s, now));
    return json_response(req, http::status::ok,
                         {{"host_id", st.host_id},
                          {"running", st.running},
                          {"queued", st.queued},
                          {"launching", st.launching},
                          {"capacity", st.capacity},
                          {"live_workers", st.live_workers},
                          {"pacing", to_string(manager.config().pacing)},
                          {"sessions", sessions}});
  }

  struct Wake {
    explicit Wake(asio::any_io_executor ex) : timer(ex) {}
    asio::steady_timer timer;
    bool dirty = false;
    bool closed = false;
    std::vector<std::string> outbox;
  };

  awaitable<void> realtime(beast::tcp_stream stream, Request req, const Target& target) {
    auto self = shared_from_this();
    const auto sid = param(target.params, "session_id");
    const auto uid = param(target.params, "user_id");
    const auto info = sid ? manager.session(*sid) : std::nullopt;
    auto channel = info ? manager.channel(*sid) : nullptr;
    if (!info || !uid || info->user_id != *uid || !channel) {
      Response res = error_response(req, info ? http::status::forbidden : http::status::not_found,
                                    info && channel ? "user mismatch" : "no live session");
      res.keep_alive(false);
      co_await http::async_write(stream, res, use_awaitable);
      co_return;
    }

    auto ws = std::make_shared<websocket::stream<beast::tcp_stream>>(std::move(stream));
    ws->set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    co_await ws->async_accept(req, use_awaitable);
    ws->text(true);

    auto wake = std::make_shared<Wake>(co_await asio::this_coro::executor);
    std::weak_ptr<Wake> weak = wake;
    auto ex = co_await asio::this_coro::executor;
    auto attachment = channel->attach([weak, ex] {
      asio::post(ex, [weak] {
        if (auto w = weak.lock()) {
          w->dirty = true;
          w->timer.cancel();
        }
      });
    });

    asio::co_spawn(ex, read_loop(ws, wake, channel), asio::detached);

    std::uint64_t cursor = attachment.cursor;
    try {
      co_await ws->async_write(asio::buffer(attachment.hello), use_awaitable);
      if (attachment.snapshot) co_await ws->async_write(asio::buffer(*attachment.snapshot), use_awaitable);
      while (!wake->closed) {
        wake->dirty = false;
        bool ended = false;
        auto frames = channel->read(cursor, ended);
        auto local = std::move(wake->outbox);
        wake->outbox.clear();
        for (const auto& f : local) co_await ws->async_write(asio::buffer(f), use_awaitable);
        for (const auto& f : frames) co_await ws->async_write(asio::buffer(f), use_awaitable);
        if (ended) {
          co_await ws->async_close(websocket::close_code::normal, use_awaitable);
          break;
        }
        if (wake->dirty || !wake->outbox.empty()) continue;
        wake->timer.expires_after(std::chrono::milliseconds(50));
        boost::system::error_code ec;
        try {
          co_await wake->timer.async_wait(use_awaitable);
        } catch (const boost::system::system_error&) {
          // Cancelled by a notification.
        }
      }
    } catch (const boost::system::system_error&) {
      // Client went away; the session keeps running and can be reattached.
    }
    wake->closed = true;
    channel->detach(attachment.token);
    beast::error_code ec;
    beast::get_lowest_layer(*ws).socket().close(ec);
  }

  static awaitable<void> read_loop(std::shared_ptr<websocket::stream<beast::tcp_stream>> ws, std::shared_ptr<Wake> wake,
                                   std::shared_ptr<session::SessionChannel> channel) {
    beast::flat_buffer buf;
    try {
      while (!wake->closed) {
        buf.clear();
        co_await ws->async_read(buf, use_awaitable);
        const std::string text = beast::buffers_to_string(buf.data());
        const auto msg = session::decode_client(text);
        if (!msg) {
          wake->outbox.push_back(session::encode_server(session::ErrorMessage{"malformed message"}));
        } else if (const auto* keys = std::get_if<session::KeysMessage>(&*msg)) {
          channel->submit(*keys);
          continue;
        } else {
          wake->outbox.push_back(session::encode_server(session::PongMessage{std::get<session::PingMessage>(*msg).id}));
        }
        wake->timer.cancel();
      }
    } catch (const boost::system::system_error&) {
    }
    wake->closed = true;
    wake->timer.cancel();
  }
};

HostServer::HostServer(asio::io_context& io, session::SessionManager& manager, const std::string& address,
                       unsigned short port)
    : impl_(std::make_shared<Impl>(io, manager, address, port)) {}

HostServer::~HostServer() = default;

unsigned short HostServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HostServer::start() { asio::co_spawn(impl_->io, impl_->accept_loop(), asio::detached); }

void HostServer::stop() {
  auto impl = impl_;
  asio::post(impl->io, [impl] {
    beast::error_code ec;
    impl->acceptor.close(ec);
  });
}

}  // namespace crowdnav::net
