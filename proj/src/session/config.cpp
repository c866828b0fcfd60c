#include "crowdnav/session/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace crowdnav::session {

std::string_view to_string(Pacing p) { return p == Pacing::lockstep ? "lockstep" : "realtime"; }

std::optional<Pacing> parse_pacing(std::string_view text) {
  if (text == "realtime") return Pacing::realtime;
  if (text == "lockstep") return Pacing::lockstep;
  return std::nullopt;
}

void HostConfig::validate() const {
  if (host_id.empty() || host_id.find('.') != std::string::npos)
    throw ConfigError("host_id must be non-empty and contain no '.'");
  if (max_sessions < 1) throw ConfigError("max_sessions must be >= 1");
  if (!(time_limit > 0)) throw ConfigError("time_limit must be > 0");
  if (launch_lanes < 1) throw ConfigError("launch_lanes must be >= 1");
  if (reap_period < 0) throw ConfigError("reap_period must be >= 0");
  if (!(tick_rate > 0)) throw ConfigError("tick_rate must be > 0");
  if (snapshot_every < 1 || decimation < 1) throw ConfigError("snapshot_every and decimation must be >= 1");
  if (lidar_every < 0) throw ConfigError("lidar_every must be >= 0");
  if (lockstep_wall_factor < 1) throw ConfigError("lockstep_wall_factor must be >= 1");
}

void GatewayConfig::validate() const {
  if (hosts.empty()) throw ConfigError("gateway needs at least one host");
  if (!(sticky_window > 0)) throw ConfigError("sticky_window must be > 0");
  if (!(health_period > 0) || !(health_timeout > 0)) throw ConfigError("health timings must be > 0");
  if (down_after < 1 || up_after < 1) throw ConfigError("down_after and up_after must be >= 1");
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace {

YAML::Node section(const std::string& text, const char* name) {
  if (text.empty()) return {};
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (!doc.IsMap()) return {};
  return doc[name];
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (!node || !node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("bad value for ") + key);
  }
}

template <typename T>
void env_override(const EnvLookup& env, const std::string& name, T& out) {
  const auto v = env(name);
  if (!v) return;
  try {
    out = YAML::Load(*v).as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for " + name);
  }
}

std::string slurp(const std::filesystem::path& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split_hosts(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

HostConfig parse_host_config(const std::string& yaml_text, const EnvLookup& env) {
  HostConfig c;
  const YAML::Node n = section(yaml_text, "host");
  std::string data_dir = c.data_dir.string(), scenario_dir, pacing = "realtime";
  read(n, "host_id", c.host_id);
  read(n, "bind", c.bind_address);
  read(n, "port", c.port);
  read(n, "max_sessions", c.max_sessions);
  read(n, "time_limit", c.time_limit);
  read(n, "data_dir", data_dir);
  read(n, "scenario_dir", scenario_dir);
  read(n, "launch_lanes", c.launch_lanes);
  read(n, "reap_period", c.reap_period);
  read(n, "pacing", pacing);
  read(n, "tick_rate", c.tick_rate);
  read(n, "snapshot_every", c.snapshot_every);
  read(n, "decimation", c.decimation);
  read(n, "lidar_every", c.lidar_every);
  read(n, "lockstep_wall_factor", c.lockstep_wall_factor);
  read(n, "retry_after", c.retry_after);

  env_override(env, "CROWDNAV_HOST_ID", c.host_id);
  env_override(env, "CROWDNAV_BIND", c.bind_address);
  env_override(env, "CROWDNAV_PORT", c.port);
  env_override(env, "CROWDNAV_MAX_SESSIONS", c.max_sessions);
  env_override(env, "CROWDNAV_TIME_LIMIT", c.time_limit);
  env_override(env, "CROWDNAV_DATA_DIR", data_dir);
  env_override(env, "CROWDNAV_SCENARIO_DIR", scenario_dir);
  env_override(env, "CROWDNAV_PACING", pacing);

  c.data_dir = data_dir;
  c.scenario_dir = scenario_dir;
  const auto p = parse_pacing(pacing);
  if (!p) throw ConfigError("pacing must be realtime or lockstep");
  c.pacing = *p;
  c.validate();
  return c;
}

GatewayConfig parse_gateway_config(const std::string& yaml_text, const EnvLookup& env) {
  GatewayConfig c;
  const YAML::Node n = section(yaml_text, "gateway");
  read(n, "bind", c.bind_address);
  read(n, "port", c.port);
  read(n, "hosts", c.hosts);
  read(n, "sticky_window", c.sticky_window);
  read(n, "health_period", c.health_period);
  read(n, "health_timeout", c.health_timeout);
  read(n, "down_after", c.down_after);
  read(n, "up_after", c.up_after);

  env_override(env, "CROWDNAV_BIND", c.bind_address);
  env_override(env, "CROWDNAV_GATEWAY_PORT", c.port);
  env_override(env, "CROWDNAV_STICKY_WINDOW", c.sticky_window);
  if (const auto hosts = env("CROWDNAV_GATEWAY_HOSTS")) c.hosts = split_hosts(*hosts);
  c.validate();
  return c;
}

HostConfig load_host_config(const std::filesystem::path& path, const EnvLookup& env) {
  return parse_host_config(slurp(path), env);
}

GatewayConfig load_gateway_config(const std::filesystem::path& path, const EnvLookup& env) {
  return parse_gateway_config(slurp(path), env);
}

std::filesystem::path bundled_asset_dir() {
  if (const auto dir = process_env("CROWDNAV_ASSET_DIR")) return *dir;
  return CROWDNAV_ASSET_DIR;
}

}  // namespace crowdnav::session
