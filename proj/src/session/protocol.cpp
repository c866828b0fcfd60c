#include "crowdnav/session/protocol.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include "crowdnav/random.hpp"

namespace crowdnav::session {

using nlohmann::json;

std::optional<ClientMessage> decode_client(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    const std::string t = j.at("t").get<std::string>();
    if (t == "keys") {
      KeysMessage m;
      if (!j.at("down").is_array()) return std::nullopt;
      for (const auto& k : j.at("down")) {
        const std::string key = k.get<std::string>();
        if (key == "W") m.command.w = true;
        else if (key == "A") m.command.a = true;
        else if (key == "S") m.command.s = true;
        else if (key == "D") m.command.d = true;
        else return std::nullopt;
      }
      if (j.contains("cam")) {
        const std::string cam = j.at("cam").get<std::string>();
        if (cam == "raise") m.command.camera = CameraAction::raise;
        else if (cam == "lower") m.command.camera = CameraAction::lower;
        else if (cam != "none") return std::nullopt;
      }
      if (j.contains("ack")) m.ack = j.at("ack").get<std::uint64_t>();
      return m;
    }
    if (t == "ping") return PingMessage{j.at("id").get<std::int64_t>()};
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

std::string encode_client(const ClientMessage& msg) {
  if (const auto* k = std::get_if<KeysMessage>(&msg)) {
    json down = json::array();
    for (char c : k->command.keys()) down.push_back(std::string(1, c));
    json j{{"t", "keys"}, {"down", down}};
    if (k->ack) j["ack"] = *k->ack;
    return j.dump();
  }
  return json{{"t", "ping"}, {"id", std::get<PingMessage>(msg).id}}.dump();
}

namespace {

json event_json(const telemetry::EventRecord& e) {
  json j{{"t", "event"}, {"kind", e.kind}, {"tick", e.tick}, {"time", e.sim_time}};
  if (e.agent >= 0) j["a"] = e.agent;
  if (e.other >= 0) j["b"] = e.other;
  if (!e.pair_kind.empty()) j["pair"] = e.pair_kind;
  if (e.kind == "collision") j["push"] = e.push;
  if (!e.completed.empty()) j["completed"] = e.completed;
  if (!e.next.empty()) j["next"] = e.next;
  return j;
}

struct Encoder {
  json operator()(const HelloMessage& h) const {
    return json{{"t", "hello"},
                {"session_id", h.session_id},
                {"user_id", h.user_id},
                {"scenario", h.scenario_id},
                {"pacing", h.pacing},
                {"dt", h.dt},
                {"time_limit", h.time_limit},
                {"avatar_id", h.avatar_id},
                {"robot_id", h.robot_id},
                {"landmark", {{"x", h.landmark.x}, {"y", h.landmark.y}, {"tag", h.landmark_tag}}}};
  }
  json operator()(const SnapshotMessage& s) const {
    json agents = json::array();
    for (const auto& a : s.agents)
      agents.push_back({{"id", a.id}, {"kind", to_string(a.kind)}, {"x", a.x}, {"y", a.y}, {"th", a.theta}, {"r", a.radius}});
    return json{{"t", "snap"}, {"tick", s.tick}, {"time", s.time}, {"phase", s.phase}, {"follow", s.follow},
                {"agents", agents}};
  }
  json operator()(const EventMessage& e) const { return event_json(e.event); }
  json operator()(const EndMessage& e) const { return json{{"t", "end"}, {"outcome", e.outcome}, {"code", e.code}}; }
  json operator()(const PongMessage& p) const { return json{{"t", "pong"}, {"id", p.id}}; }
  json operator()(const ErrorMessage& e) const { return json{{"t", "error"}, {"reason", e.reason}}; }
};

}  // namespace

std::string encode_server(const ServerMessage& msg) { return std::visit(Encoder{}, msg).dump(); }

std::optional<ServerMessage> decode_server(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  try {
    const std::string t = j.at("t").get<std::string>();
    if (t == "snap") {
      SnapshotMessage s;
      s.tick = j.at("tick").get<std::uint64_t>();
      s.time = j.at("time").get<double>();
      s.phase = j.at("phase").get<std::string>();
      s.follow = j.value("follow", 0.0);
      for (const auto& a : j.at("agents")) {
        telemetry::AgentSample sample;
        sample.id = a.at("id").get<int>();
        const auto kind = parse_agent_kind(a.at("kind").get<std::string>());
        if (!kind) return std::nullopt;
        sample.kind = *kind;
        sample.x = a.at("x").get<double>();
        sample.y = a.at("y").get<double>();
        sample.theta = a.at("th").get<double>();
        sample.radius = a.at("r").get<double>();
        s.agents.push_back(sample);
      }
      return s;
    }
    if (t == "hello") {
      HelloMessage h;
      h.session_id = j.at("session_id").get<std::string>();
      h.user_id = j.value("user_id", "");
      h.scenario_id = j.at("scenario").get<std::string>();
      h.pacing = j.at("pacing").get<std::string>();
      h.dt = j.at("dt").get<double>();
      h.time_limit = j.at("time_limit").get<double>();
      h.avatar_id = j.at("avatar_id").get<int>();
      h.robot_id = j.at("robot_id").get<int>();
      const auto& lm = j.at("landmark");
      h.landmark = {lm.at("x").get<double>(), lm.at("y").get<double>()};
      h.landmark_tag = lm.value("tag", "");
      return h;
    }
    if (t == "event") {
      telemetry::EventRecord e;
      e.kind = j.at("kind").get<std::string>();
      e.tick = j.at("tick").get<std::uint64_t>();
      e.sim_time = j.at("time").get<double>();
      e.agent = j.value("a", -1);
      e.other = j.value("b", -1);
      e.pair_kind = j.value("pair", "");
      e.push = j.value("push", false);
      e.completed = j.value("completed", "");
      e.next = j.value("next", "");
      return EventMessage{e};
    }
    if (t == "end") return EndMessage{j.at("outcome").get<std::string>(), j.value("code", "")};
    if (t == "pong") return PongMessage{j.at("id").get<std::int64_t>()};
    if (t == "error") return ErrorMessage{j.at("reason").get<std::string>()};
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

std::string completion_code(const std::string& session_id) {
  return fmt::format("CN-{:08X}", static_cast<std::uint32_t>(stable_hash("completion:" + session_id) >> 16));
}

}  // namespace crowdnav::session

#include "crowdnav/task/scenario.hpp"

namespace crowdnav::session {

namespace {

json pose_json(const Pose2D& p) { return json::array({p.x, p.y, p.theta}); }

Pose2D pose_from(const json& j) { return Pose2D::make(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

}  // namespace

std::string encode_scenario(const task::Scenario& s) {
  const OccupancyGrid& g = *s.map;
  json rows = json::array();
  for (int r = g.height() - 1; r >= 0; --r) {
    std::string line(static_cast<std::size_t>(g.width()), '.');
    for (int c = 0; c < g.width(); ++c)
      if (g.occupied({r, c})) line[static_cast<std::size_t>(c)] = '#';
    rows.push_back(line);
  }
  json npcs = json::array();
  for (const auto& n : s.npcs) npcs.push_back({{"start", pose_json(n.start)}, {"goal", pose_json(n.goal)}});
  return json{{"id", s.id},
              {"environment", s.environment},
              {"time_limit", s.time_limit},
              {"map", {{"resolution", g.resolution()}, {"origin", {g.origin().x, g.origin().y}}, {"rows", rows}}},
              {"avatar", {{"start", pose_json(s.avatar_start)}, {"goal", pose_json(s.avatar_goal)}}},
              {"robot", {{"start", pose_json(s.robot_start)}, {"goal", pose_json(s.robot_goal)}}},
              {"landmark", {{"pose", pose_json(s.landmark.pose)}, {"tag", s.landmark.tag}}},
              {"npcs", npcs}}
      .dump();
}

task::Scenario decode_scenario(std::string_view text) {
  try {
    const json j = json::parse(text);
    task::Scenario s;
    s.id = j.at("id").get<std::string>();
    s.environment = j.value("environment", "");
    s.time_limit = j.at("time_limit").get<double>();
    const auto& m = j.at("map");
    const auto rows = m.at("rows").get<std::vector<std::string>>();
    const auto& o = m.at("origin");
    s.map = std::make_shared<const OccupancyGrid>(
        OccupancyGrid::from_rows(rows, m.at("resolution").get<double>(), {o.at(0).get<double>(), o.at(1).get<double>()}));
    s.avatar_start = pose_from(j.at("avatar").at("start"));
    s.avatar_goal = pose_from(j.at("avatar").at("goal"));
    s.robot_start = pose_from(j.at("robot").at("start"));
    s.robot_goal = pose_from(j.at("robot").at("goal"));
    s.landmark.pose = pose_from(j.at("landmark").at("pose"));
    s.landmark.tag = j.at("landmark").value("tag", "");
    for (const auto& n : j.at("npcs")) s.npcs.push_back({pose_from(n.at("start")), pose_from(n.at("goal"))});
    return s;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed scenario document: ") + e.what());
  } catch (const MapError& e) {
    throw std::runtime_error(std::string("malformed scenario map: ") + e.what());
  }
}

}  // namespace crowdnav::session
