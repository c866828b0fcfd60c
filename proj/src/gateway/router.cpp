#include "crowdnav/gateway/router.hpp"

namespace crowdnav::gateway {

Router::Router(std::vector<std::string> endpoints, double sticky_window_s, int down_after, int up_after)
    : window_(std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(sticky_window_s))),
      down_after_(down_after),
      up_after_(up_after) {
  if (endpoints.empty()) throw std::invalid_argument("Router needs at least one host");
  if (!(sticky_window_s > 0) || down_after < 1 || up_after < 1) throw std::invalid_argument("Router: bad parameters");
  for (auto& e : endpoints) hosts_.push_back({std::move(e)});
}

std::size_t Router::assign_host(const std::string& user_id, Clock::time_point now) {
  auto it = bindings_.find(user_id);
  if (it != bindings_.end() && now < it->second.expiry) {
    it->second.bound_at = now;
    it->second.expiry = now + window_;
    return it->second.host;
  }
  const std::size_t n = hosts_.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (rr_ + k) % n;
    if (hosts_[i].health != Health::up) continue;
    rr_ = (i + 1) % n;
    ++hosts_[i].assigned;
    bindings_[user_id] = {user_id, i, now, now + window_};
    return i;
  }
  throw UnavailableError("no host is up");
}

std::optional<std::size_t> Router::bound_host(const std::string& user_id, Clock::time_point now) const {
  const auto it = bindings_.find(user_id);
  if (it == bindings_.end() || now >= it->second.expiry) return std::nullopt;
  return it->second.host;
}

void Router::record_probe(std::size_t host, bool ok) {
  HostEntry& h = hosts_.at(host);
  if (ok) {
    h.consecutive_failures = 0;
    if (++h.consecutive_successes >= up_after_) h.health = Health::up;
  } else {
    h.consecutive_successes = 0;
    if (++h.consecutive_failures >= down_after_) h.health = Health::down;
  }
}

void Router::set_health(std::size_t host, Health health) { hosts_.at(host).health = health; }

std::size_t Router::prune(Clock::time_point now) {
  return std::erase_if(bindings_, [&](const auto& kv) { return now >= kv.second.expiry; });
}

}  // namespace crowdnav::gateway
