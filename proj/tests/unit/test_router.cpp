#include <gtest/gtest.h>

#include <map>
#include <random>

#include "crowdnav/gateway/router.hpp"

using namespace crowdnav::gateway;
using namespace std::chrono_literals;

namespace {
const Clock::time_point t0 = Clock::time_point{} + 100h;
}

TEST(Router, RoundRobinFreshUsers) {
  Router r({"h1", "h2", "h3"});
  EXPECT_EQ(r.assign_host("u1", t0), 0u);
  EXPECT_EQ(r.assign_host("u2", t0), 1u);
  EXPECT_EQ(r.assign_host("u3", t0), 2u);
  EXPECT_EQ(r.assign_host("u4", t0), 0u);
  EXPECT_EQ(r.host(0).assigned, 2u);
}

TEST(Router, StickyWithinWindowAndExpiry) {
  Router r({"h1", "h2", "h3"});
  EXPECT_EQ(r.assign_host("u1", t0), 0u);
  EXPECT_EQ(r.assign_host("u1", t0 + 10min), 0u);
  EXPECT_EQ(r.bound_host("u1", t0 + 10min), 0u);
  // Sliding: last touch at +10 min, so +2h is still inside.
  EXPECT_EQ(r.assign_host("u1", t0 + 2h), 0u);
  EXPECT_FALSE(r.bound_host("u1", t0 + 2h + 2h + 1s));
  EXPECT_EQ(r.assign_host("u1", t0 + 5h + 1s), 1u);  // next round-robin host
  EXPECT_EQ(r.prune(t0 + 100h), 1u);
  EXPECT_EQ(r.binding_count(), 0u);
}

TEST(Router, HealthFilterAndHysteresis) {
  Router r({"h1", "h2", "h3"});
  r.record_probe(1, false);
  EXPECT_EQ(r.host(1).health, Health::up);
  r.record_probe(1, false);
  EXPECT_EQ(r.host(1).health, Health::down);
  std::vector<std::size_t> got;
  for (int i = 0; i < 4; ++i) got.push_back(r.assign_host("f" + std::to_string(i), t0));
  EXPECT_EQ(got, (std::vector<std::size_t>{0, 2, 0, 2}));
  r.record_probe(1, true);
  EXPECT_EQ(r.host(1).health, Health::up);
  EXPECT_LT(r.rr_index(), 3u);
}

TEST(Router, BindingKeptWhileHostDown) {
  Router r({"h1", "h2"});
  EXPECT_EQ(r.assign_host("u", t0), 0u);
  r.set_health(0, Health::down);
  EXPECT_EQ(r.assign_host("u", t0 + 1s), 0u);
  r.set_health(1, Health::down);
  EXPECT_THROW(r.assign_host("fresh", t0), UnavailableError);
  EXPECT_THROW(Router({}), std::invalid_argument);
}

TEST(Router, StickinessAndFairnessOverRandomInterleavings) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 200; ++round) {
    Router r({"a", "b", "c", "d"});
    std::map<std::string, std::size_t> first;
    Clock::time_point now = t0;
    for (int step = 0; step < 400; ++step) {
      now += std::chrono::seconds(rng() % 30);
      const std::string user = "u" + std::to_string(rng() % 50);
      const std::size_t h = r.assign_host(user, now);
      const auto [it, fresh] = first.emplace(user, h);
      EXPECT_EQ(it->second, h) << user;
    }
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& e : r.hosts()) {
      lo = std::min(lo, e.assigned);
      hi = std::max(hi, e.assigned);
    }
    EXPECT_LE(hi - lo, 1u);
  }
}
