#pragma once

#include <memory>
#include <string>

#include <boost/asio/io_context.hpp>

#include "crowdnav/gateway/router.hpp"
#include "crowdnav/session/config.hpp"

namespace crowdnav::gateway {

inline constexpr const char* kUserCookie = "crowdnav_uid";

/// Single public entry point. Every request is relayed to the host bound to
/// its user (query user_id, else the crowdnav_uid cookie, else a fresh id
/// set as that cookie); websocket upgrades become raw byte pumps. The pool
/// view is served at GET /gateway/status.
class GatewayServer {
 public:
  GatewayServer(boost::asio::io_context& io, session::GatewayConfig config);
  ~GatewayServer();

  unsigned short port() const;
  void start();
  void stop();

  /// Copy of the routing state, safe from any thread.
  Router router_snapshot() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace crowdnav::gateway
