#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdnav::gateway {

using Clock = std::chrono::steady_clock;

enum class Health { up, down };

struct HostEntry {
  std::string endpoint;  // "address:port", also the host's id at the gateway
  Health health = Health::up;
  int consecutive_failures = 0;
  int consecutive_successes = 0;
  std::size_t assigned = 0;  // fresh bindings created for this host
};

struct StickyBinding {
  std::string user_id;
  std::size_t host = 0;
  Clock::time_point bound_at{};
  Clock::time_point expiry{};
};

/// No host is up.
class UnavailableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// User-to-host routing: sticky bindings with a sliding window, round robin
/// over healthy hosts for users without a live binding, and probe-driven
/// health. Not thread-safe; the gateway serializes access.
class Router {
 public:
  Router(std::vector<std::string> endpoints, double sticky_window_s = 7200.0, int down_after = 2, int up_after = 1);

  /// Live binding -> its host (refreshing the window, even when that host is
  /// down). Otherwise the next up host in round-robin order gets a new
  /// binding. Throws UnavailableError when no host is up.
  std::size_t assign_host(const std::string& user_id, Clock::time_point now);

  /// Host of a live binding without creating or refreshing anything.
  std::optional<std::size_t> bound_host(const std::string& user_id, Clock::time_point now) const;

  void record_probe(std::size_t host, bool ok);
  void set_health(std::size_t host, Health health);

  /// Drops expired bindings; returns how many.
  std::size_t prune(Clock::time_point now);

  const std::vector<HostEntry>& hosts() const { return hosts_; }
  const HostEntry& host(std::size_t i) const { return hosts_.at(i); }
  std::size_t rr_index() const { return rr_; }
  std::size_t binding_count() const { return bindings_.size(); }
  Clock::duration sticky_window() const { return window_; }

 private:
  std::vector<HostEntry> hosts_;
  std::map<std::string, StickyBinding> bindings_;
  Clock::duration window_;
  int down_after_;
  int up_after_;
  std::size_t rr_ = 0;
};

}  // namespace crowdnav::gateway
