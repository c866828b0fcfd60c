#include "crowdnav/gateway/server.hpp"

#include <mutex>
#include <random>

#include <boost/asio/co_spawn.hpp>
#include <boost/asio/detached.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/use_awaitable.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "crowdnav/net/http_util.hpp"

namespace crowdnav::gateway {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
using asio::awaitable;
using asio::use_awaitable;
using asio::ip::tcp;
using nlohmann::json;
using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

namespace {

const http::field kHopHeaders[] = {http::field::connection,        http::field::keep_alive,
                                   http::field::proxy_authenticate, http::field::proxy_authorization,
                                   http::field::te,                 http::field::trailer,
                                   http::field::transfer_encoding,  http::field::upgrade};

template <typename Message>
void strip_hop_headers(Message& m) {
  for (const auto f : kHopHeaders) m.erase(f);
}

Response simple(const Request& req, http::status status, const json& body) {
  Response res{status, req.version()};
  res.set(http::field::server, "crowdnav-gateway");
  res.set(http::field::content_type, "application/json");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

std::string fresh_user_id() {
  static std::mt19937_64 rng{std::random_device{}()};
  static std::mutex m;
  std::lock_guard lock(m);
  return fmt::format("u{:016x}", rng());
}

}  // namespace

struct GatewayServer::Impl : std::enable_shared_from_this<Impl> {
  asio::io_context& io;
  session::GatewayConfig config;
  tcp::acceptor acceptor;
  mutable std::mutex mutex;
  Router router;
  std::vector<std::pair<std::string, unsigned short>> endpoints;
  bool stopped = false;

  Impl(asio::io_context& io_, session::GatewayConfig c)
      : io(io_),
        config(std::move(c)),
        acceptor(io_),
        router(config.hosts, config.sticky_window, config.down_after, config.up_after) {
    for (const auto& h : config.hosts) {
      const auto ep = net::split_endpoint(h);
      if (!ep) throw session::ConfigError("bad host endpoint: " + h);
      endpoints.push_back(*ep);
    }
    const tcp::endpoint ep(asio::ip::make_address(config.bind_address), config.port);
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
      } catch (const boost::system::system_error&) {
        if (!acceptor.is_open()) co_return;
        continue;
      }
      socket.set_option(tcp::no_delay(true));
      asio::co_spawn(io, serve(std::move(socket)), asio::detached);
    }
  }

  awaitable<std::optional<beast::tcp_stream>> connect_host(std::size_t host, std::chrono::milliseconds timeout) {
    beast::tcp_stream upstream(io);
    upstream.expires_after(timeout);
    try {
      const auto& [addr, port] = endpoints[host];
      co_await upstream.async_connect(tcp::endpoint(asio::ip::make_address(addr), port), use_awaitable);
      upstream.socket().set_option(tcp::no_delay(true));
      upstream.expires_never();
      co_return std::optional<beast::tcp_stream>(std::move(upstream));
    } catch (const std::exception&) {
      co_return std::nullopt;
    }
  }

  awaitable<void> serve(tcp::socket socket) {
    auto self = shared_from_this();
    beast::tcp_stream client(std::move(socket));
    beast::flat_buffer buffer;
    try {
      while (true) {
        Request req;
        client.expires_after(std::chrono::seconds(60));
        co_await http::async_read(client, buffer, req, use_awaitable);
        client.expires_never();
        auto target = net::parse_target(std::string(req.target()));
        if (!target) {
          Response res = simple(req, http::status::bad_request, {{"status", "error"}, {"reason", "bad_request"}});
          co_await http::async_write(client, res, use_awaitable);
          continue;
        }
        if (target->path == "/gateway/status") {
          Response res = simple(req, http::status::ok, status_json());
          const bool keep = res.keep_alive();
          co_await http::async_write(client, res, use_awaitable);
          if (!keep) break;
          continue;
        }

        // Sticky key: explicit user_id, else the browser cookie, else a new cookie.
        std::optional<std::string> set_cookie;
        auto user = net::param(target->params, "user_id");
        if (!user) {
          user = net::cookie_value(std::string(req[http::field::cookie]), kUserCookie);
          if (!user) {
            user = fresh_user_id();
            set_cookie = *user;
          }
          target->params.emplace_back("user_id", *user);
          req.target(net::build_target(target->path, target->params));
        }

        std::size_t host = 0;
        try {
          std::lock_guard lock(mutex);
          host = router.assign_host(*user, Clock::now());
        } catch (const UnavailableError&) {
          Response res = simple(req, http::status::service_unavailable, {{"status", "error"}, {"reason", "no_host"}});
          res.set(http::field::retry_after, "1");
          co_await http::async_write(client, res, use_awaitable);
          continue;
        }

        auto upstream = co_await connect_host(host, std::chrono::milliseconds(1000));
        if (!upstream) {
          // Binding kept: the host may come back and still owns the session.
          Response res = simple(req, http::status::service_unavailable, {{"status", "error"}, {"reason", "host_unreachable"}});
          res.set(http::field::retry_after, "1");
          if (set_cookie) res.set(http::field::set_cookie, fmt::format("{}={}; Path=/; SameSite=Lax", kUserCookie, *set_cookie));
          const bool keep = res.keep_alive();
          co_await http::async_write(client, res, use_awaitable);
          if (!keep) break;
          continue;
        }

        if (beast::websocket::is_upgrade(req)) {
          req.set("X-Forwarded-For", client.socket().remote_endpoint().address().to_string());
          co_await http::async_write(*upstream, req, use_awaitable);
          co_await pump(std::move(client), std::move(*upstream), std::move(buffer));
          co_return;
        }

        const bool keep = req.keep_alive();
        strip_hop_headers(req);
        req.keep_alive(false);
        req.set("X-Forwarded-For", client.socket().remote_endpoint().address().to_string());
        req.prepare_payload();
        Response res;
        try {
          co_await http::async_write(*upstream, req, use_awaitable);
          beast::flat_buffer ubuf;
          upstream->expires_after(std::chrono::seconds(30));
          co_await http::async_read(*upstream, ubuf, res, use_awaitable);
        } catch (const boost::system::system_error&) {
          res = simple(req, http::status::service_unavailable, {{"status", "error"}, {"reason", "host_unreachable"}});
        }
        beast::error_code ec;
        upstream->socket().shutdown(tcp::socket::shutdown_both, ec);
        upstream->socket().close(ec);
        strip_hop_headers(res);
        res.set(http::field::server, "crowdnav-gateway");
        if (set_cookie) res.set(http::field::set_cookie, fmt::format("{}={}; Path=/; SameSite=Lax", kUserCookie, *set_cookie));
        res.version(req.version());
        res.keep_alive(keep);
        res.prepare_payload();
        co_await http::async_write(client, res, use_awaitable);
        if (!keep) break;
      }
      beast::error_code ec;
      client.socket().shutdown(tcp::socket::shutdown_send, ec);
    } catch (const boost::system::system_error&) {
    }
  }

  struct Pipe {
    tcp::socket a;
    tcp::socket b;
    void close() {
      boost::system::error_code ec;
      a.close(ec);
      b.close(ec);
    }
  };

  static awaitable<void> copy(std::shared_ptr<Pipe> pipe, bool a_to_b) {
    std::array<char, 16384> buf;
    tcp::socket& from = a_to_b ? pipe->a : pipe->b;
    tcp::socket& to = a_to_b ? pipe->b : pipe->a;
    try {
      while (true) {
        const std::size_t n = co_await from.async_read_some(asio::buffer(buf), use_awaitable);
        co_await asio::async_write(to, asio::buffer(buf.data(), n), use_awaitable);
      }
    } catch (const boost::system::system_error&) {
    }
    pipe->close();
  }

  awaitable<void> pump(beast::tcp_stream client, beast::tcp_stream upstream, beast::flat_buffer pending) {
    auto pipe = std::make_shared<Pipe>(Pipe{client.release_socket(), upstream.release_socket()});
    if (pending.size() > 0) {
      try {
        co_await asio::async_write(pipe->b, pending.data(), use_awaitable);
      } catch (const boost::system::system_error&) {
        pipe->close();
        co_return;
      }
    }
    asio::co_spawn(io, copy(pipe, false), asio::detached);
    co_await copy(pipe, true);
  }

  awaitable<bool> probe(std::size_t host) {
    const auto timeout = std::chrono::milliseconds(static_cast<long>(config.health_timeout * 1000));
    auto stream = co_await connect_host(host, timeout);
    if (!stream) co_return false;
    try {
      Request req{http::verb::get, "/status", 11};
      req.set(http::field::host, config.hosts[host]);
      req.keep_alive(false);
      stream->expires_after(timeout);
      co_await http::async_write(*stream, req, use_awaitable);
      beast::flat_buffer buf;
      Response res;
      co_await http::async_read(*stream, buf, res, use_awaitable);
      beast::error_code ec;
      stream->socket().close(ec);
      co_return res.result() == http::status::ok;
    } catch (const boost::system::system_error&) {
      co_return false;
    }
  }

  awaitable<void> health_loop() {
    auto self = shared_from_this();
    asio::steady_timer timer(io);
    const auto period = std::chrono::milliseconds(static_cast<long>(config.health_period * 1000));
    while (true) {
      for (std::size_t i = 0; i < endpoints.size(); ++i) {
        const bool ok = co_await probe(i);
        std::lock_guard lock(mutex);
        const Health before = router.host(i).health;
        router.record_probe(i, ok);
        if (router.host(i).health != before)
          spdlog::info("host {} is {}", config.hosts[i], router.host(i).health == Health::up ? "up" : "down");
      }
      {
        std::lock_guard lock(mutex);
        router.prune(Clock::now());
        if (stopped) co_return;
      }
      timer.expires_after(period);
      try {
        co_await timer.async_wait(use_awaitable);
      } catch (const boost::system::system_error&) {
      }
      std::lock_guard lock(mutex);
      if (stopped) co_return;
    }
  }

  json status_json() const {
    std::lock_guard lock(mutex);
    json hosts = json::array();
    for (const auto& h : router.hosts())
      hosts.push_back({{"endpoint", h.endpoint},
                       {"health", h.health == Health::up ? "up" : "down"},
                       {"consecutive_failures", h.consecutive_failures},
                       {"assigned", h.assigned}});
    return {{"hosts", hosts},
            {"pool_size", router.hosts().size()},
            {"rr_index", router.rr_index()},
            {"bindings", router.binding_count()},
            {"sticky_window", std::chrono::duration<double>(router.sticky_window()).count()}};
  }
};

GatewayServer::GatewayServer(asio::io_context& io, session::GatewayConfig config)
    : impl_(std::make_shared<Impl>(io, std::move(config))) {}

GatewayServer::~GatewayServer() = default;

unsigned short GatewayServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void GatewayServer::start() {
  asio::co_spawn(impl_->io, impl_->accept_loop(), asio::detached);
  asio::co_spawn(impl_->io, impl_->health_loop(), asio::detached);
}

void GatewayServer::stop() {
  auto impl = impl_;
  {
    std::lock_guard lock(impl->mutex);
    impl->stopped = true;
  }
  asio::post(impl->io, [impl] {
    beast::error_code ec;
    impl->acceptor.close(ec);
  });
}

Router GatewayServer::router_snapshot() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->router;
}

}  // namespace crowdnav::gateway
