#include "crowdnav/telemetry/records.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace crowdnav::telemetry {

using nlohmann::json;

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::completed: return "completed";
    case Outcome::expired: return "expired";
    case Outcome::shutdown: return "shutdown";
    case Outcome::failed: return "failed";
    case Outcome::unknown: return "unknown";
  }
  return "unknown";
}

Outcome parse_outcome(std::string_view text) {
  for (Outcome o : {Outcome::completed, Outcome::expired, Outcome::shutdown, Outcome::failed})
    if (to_string(o) == text) return o;
  return Outcome::unknown;
}

namespace {

json encode_agent(const AgentSample& a) {
  return json{{"id", a.id}, {"kind", to_string(a.kind)}, {"x", a.x},   {"y", a.y},
              {"th", a.theta}, {"vx", a.vx},              {"vy", a.vy}, {"r", a.radius}};
}

struct Encoder {
  json operator()(const HeaderRecord& h) const {
    json j{{"type", "header"},         {"schema", kLogSchema}, {"session_id", h.session_id},
                {"scenario", h.scenario_id}, {"host", h.host_id},    {"user", h.user_id},
                {"dt", h.dt},                {"decimation", h.decimation}, {"wall_start", h.wall_start}};
    if (h.avatar_start) j["avatar_start"] = {h.avatar_start->x, h.avatar_start->y};
    return j;
  }
  json operator()(const TickRecord& t) const {
    json agents = json::array();
    for (const auto& a : t.agents) agents.push_back(encode_agent(a));
    json j{{"type", "tick"}, {"tick", t.tick}, {"t", t.sim_time}, {"phase", t.phase}, {"agents", agents}};
    if (!t.lidar.empty()) j["lidar"] = t.lidar;
    return j;
  }
  json operator()(const EventRecord& e) const {
    json j{{"type", "event"}, {"tick", e.tick}, {"t", e.sim_time}, {"kind", e.kind}};
    if (e.agent >= 0) j["a"] = e.agent;
    if (e.other >= 0) j["b"] = e.other;
    if (!e.pair_kind.empty()) j["pair"] = e.pair_kind;
    if (e.kind == "collision") j["push"] = e.push;
    if (!e.completed.empty()) j["completed"] = e.completed;
    if (!e.next.empty()) j["next"] = e.next;
    return j;
  }
  json operator()(const EndRecord& e) const {
    return json{{"type", "end"}, {"tick", e.tick}, {"t", e.sim_time}, {"outcome", to_string(e.outcome)},
                {"degraded", e.degraded}};
  }
};

}  // namespace

std::string encode(const LogRecord& record) { return std::visit(Encoder{}, record).dump(); }

std::optional<LogRecord> decode(std::string_view line) {
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("type")) return std::nullopt;
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      HeaderRecord h;
      h.session_id = j.at("session_id").get<std::string>();
      h.scenario_id = j.value("scenario", "");
      h.host_id = j.value("host", "");
      h.user_id = j.value("user", "");
      h.dt = j.at("dt").get<double>();
      h.decimation = j.value("decimation", 1);
      h.wall_start = j.value("wall_start", "");
      if (j.contains("avatar_start")) {
        const auto& p = j.at("avatar_start");
        h.avatar_start = Vec2{p.at(0).get<double>(), p.at(1).get<double>()};
      }
      return h;
    }
    if (type == "tick") {
      TickRecord t;
      t.tick = j.at("tick").get<std::uint64_t>();
      t.sim_time = j.at("t").get<double>();
      t.phase = j.at("phase").get<std::string>();
      for (const auto& a : j.at("agents")) {
        AgentSample s;
        s.id = a.at("id").get<int>();
        const auto kind = parse_agent_kind(a.at("kind").get<std::string>());
        if (!kind) return std::nullopt;
        s.kind = *kind;
        s.x = a.at("x").get<double>();
        s.y = a.at("y").get<double>();
        s.theta = a.at("th").get<double>();
        s.vx = a.at("vx").get<double>();
        s.vy = a.at("vy").get<double>();
        s.radius = a.at("r").get<double>();
        t.agents.push_back(s);
      }
      if (j.contains("lidar")) t.lidar = j.at("lidar").get<std::vector<double>>();
      return t;
    }
    if (type == "event") {
      EventRecord e;
      e.tick = j.at("tick").get<std::uint64_t>();
      e.sim_time = j.at("t").get<double>();
      e.kind = j.at("kind").get<std::string>();
      e.agent = j.value("a", -1);
      e.other = j.value("b", -1);
      e.pair_kind = j.value("pair", "");
      e.push = j.value("push", false);
      e.completed = j.value("completed", "");
      e.next = j.value("next", "");
      return e;
    }
    if (type == "end") {
      EndRecord e;
      e.tick = j.at("tick").get<std::uint64_t>();
      e.sim_time = j.at("t").get<double>();
      e.outcome = parse_outcome(j.at("outcome").get<std::string>());
      e.degraded = j.value("degraded", false);
      return e;
    }
  } catch (const json::exception&) {
    return std::nullopt;
  }
  return std::nullopt;
}

ParsedLog parse_log(std::string_view contents) {
  ParsedLog out;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    const std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.truncated_tail = true;
      break;
    }
    const std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    if (auto rec = decode(line)) out.records.push_back(std::move(*rec));
    else ++out.corrupt_lines;
  }
  return out;
}

ParsedLog read_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str());
}

}  // namespace crowdnav::telemetry
