#pragma once

#include <memory>
#include <string>

#include <boost/asio/io_context.hpp>

#include "crowdnav/session/manager.hpp"

namespace crowdnav::net {

/// HTTP + realtime front end of one host:
///   GET /session   admission (200 attach, 202 pending, 429 capacity, 400 bad request)
///   GET /status    host_status
///   GET /scenario?id=       map and poses for clients
///   GET /summary?session_id=  finalized metrics of a session
///   GET /rt?session_id=&user_id=  websocket upgrade into the session channel
class HostServer {
 public:
  HostServer(boost::asio::io_context& io, session::SessionManager& manager, const std::string& address,
             unsigned short port);
  ~HostServer();

  /// Bound port (useful when constructed with port 0).
  unsigned short port() const;
  void start();
  void stop();

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace crowdnav::net
