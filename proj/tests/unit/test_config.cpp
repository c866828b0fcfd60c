#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "crowdnav/session/config.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;
using namespace crowdnav::session;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    const auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

const EnvLookup kNoEnv = env_of({});

}  // namespace

TEST(HostConfig, DefaultsAndFile) {
  const auto d = parse_host_config("", kNoEnv);
  EXPECT_EQ(d.max_sessions, 10);
  EXPECT_DOUBLE_EQ(d.time_limit, 300.0);
  EXPECT_EQ(d.pacing, Pacing::realtime);
  EXPECT_EQ(d.launch_lanes, 2);

  const auto c = parse_host_config("host:\n  host_id: h7\n  max_sessions: 3\n  time_limit: 30\n  pacing: lockstep\n"
                                   "  data_dir: /tmp/x\n",
                                   kNoEnv);
  EXPECT_EQ(c.host_id, "h7");
  EXPECT_EQ(c.max_sessions, 3);
  EXPECT_DOUBLE_EQ(c.time_limit, 30.0);
  EXPECT_EQ(c.pacing, Pacing::lockstep);
  EXPECT_EQ(c.data_dir, "/tmp/x");
}

TEST(HostConfig, EnvironmentOverridesFile) {
  const auto c = parse_host_config("host:\n  host_id: h1\n  max_sessions: 3\n",
                                   env_of({{"CROWDNAV_HOST_ID", "h9"},
                                           {"CROWDNAV_MAX_SESSIONS", "12"},
                                           {"CROWDNAV_TIME_LIMIT", "45.5"},
                                           {"CROWDNAV_DATA_DIR", "/data"}}));
  EXPECT_EQ(c.host_id, "h9");
  EXPECT_EQ(c.max_sessions, 12);
  EXPECT_DOUBLE_EQ(c.time_limit, 45.5);
  EXPECT_EQ(c.data_dir, "/data");
}

TEST(HostConfig, Rejections) {
  EXPECT_THROW(parse_host_config("host:\n  max_sessions: 0\n", kNoEnv), ConfigError);
  EXPECT_THROW(parse_host_config("host:\n  host_id: a.b\n", kNoEnv), ConfigError);
  EXPECT_THROW(parse_host_config("host:\n  time_limit: -1\n", kNoEnv), ConfigError);
  EXPECT_THROW(parse_host_config("host:\n  pacing: sometimes\n", kNoEnv), ConfigError);
  EXPECT_THROW(parse_host_config("host:\n  max_sessions: lots\n", kNoEnv), ConfigError);
  EXPECT_THROW(parse_host_config("host: [\n", kNoEnv), ConfigError);
  EXPECT_THROW(parse_host_config("", env_of({{"CROWDNAV_MAX_SESSIONS", "ten"}})), ConfigError);
  EXPECT_THROW(load_host_config("/nonexistent/host.yaml", kNoEnv), ConfigError);
}

TEST(HostConfig, ShippedSampleLoads) {
  const auto c = load_host_config(std::filesystem::path(CROWDNAV_ASSET_DIR) / ".." / "config" / "host.yaml", kNoEnv);
  EXPECT_EQ(c.max_sessions, 10);
  const auto g =
      load_gateway_config(std::filesystem::path(CROWDNAV_ASSET_DIR) / ".." / "config" / "gateway.yaml", kNoEnv);
  EXPECT_DOUBLE_EQ(g.sticky_window, 7200.0);
}

TEST(GatewayConfig, HostsFromFileOrEnvironment) {
  const auto g = parse_gateway_config("gateway:\n  hosts: [\"127.0.0.1:1\", \"127.0.0.1:2\"]\n", kNoEnv);
  EXPECT_EQ(g.hosts.size(), 2u);
  EXPECT_DOUBLE_EQ(g.sticky_window, 7200.0);
  EXPECT_EQ(g.down_after, 2);
  EXPECT_EQ(g.up_after, 1);
  const auto e = parse_gateway_config("", env_of({{"CROWDNAV_GATEWAY_HOSTS", "a:1,b:2,,c:3"}}));
  EXPECT_EQ(e.hosts, (std::vector<std::string>{"a:1", "b:2", "c:3"}));
  EXPECT_THROW(parse_gateway_config("", kNoEnv), ConfigError);
  EXPECT_THROW(parse_gateway_config("gateway:\n  hosts: [a:1]\n  sticky_window: 0\n", kNoEnv), ConfigError);
}

TEST(Pacing, Names) {
  EXPECT_EQ(parse_pacing("lockstep"), Pacing::lockstep);
  EXPECT_EQ(parse_pacing(to_string(Pacing::realtime)), Pacing::realtime);
  EXPECT_FALSE(parse_pacing("fast"));
}
