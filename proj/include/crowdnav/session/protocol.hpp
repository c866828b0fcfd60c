#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crowdnav/agent.hpp"
#include "crowdnav/telemetry/records.hpp"

namespace crowdnav::session {

// Realtime channel messages, one JSON object per frame.
//
//   client -> server  {"t":"keys","down":["W","D"],"ack":12}   ack: lockstep only
//                     {"t":"ping","id":3}
//   server -> client  hello, snap, event, end, pong, error

struct KeysMessage {
  AvatarCommand command;
  std::optional<std::uint64_t> ack;
  bool operator==(const KeysMessage&) const = default;
};

struct PingMessage {
  std::int64_t id = 0;
  bool operator==(const PingMessage&) const = default;
};

using ClientMessage = std::variant<KeysMessage, PingMessage>;

/// nullopt for malformed frames or keys outside {W, A, S, D}.
std::optional<ClientMessage> decode_client(std::string_view text);
std::string encode_client(const ClientMessage& msg);

struct HelloMessage {
  std::string session_id;
  std::string user_id;
  std::string scenario_id;
  std::string pacing;
  double dt = 0.05;
  double time_limit = 0;
  int avatar_id = 0;
  int robot_id = 1;
  Vec2 landmark{};
  std::string landmark_tag;
};

struct SnapshotMessage {
  std::uint64_t tick = 0;
  double time = 0;
  std::string phase;
  double follow = 0;  // accumulated follow time, s
  std::vector<telemetry::AgentSample> agents;  // velocities are not sent
};

struct EventMessage {
  telemetry::EventRecord event;
};

struct EndMessage {
  std::string outcome;
  std::string code;  // completion code for the survey
};

struct PongMessage {
  std::int64_t id = 0;
};

struct ErrorMessage {
  std::string reason;
};

using ServerMessage = std::variant<HelloMessage, SnapshotMessage, EventMessage, EndMessage, PongMessage, ErrorMessage>;

std::string encode_server(const ServerMessage& msg);
std::optional<ServerMessage> decode_server(std::string_view text);

/// Deterministic survey completion code for a session.
std::string completion_code(const std::string& session_id);

}  // namespace crowdnav::session

namespace crowdnav::task {
struct Scenario;
}

namespace crowdnav::session {

/// Scenario as served by GET /scenario: poses, landmark and the map rows, so
/// a client can render and plan without file access.
std::string encode_scenario(const task::Scenario& scenario);
/// Throws std::runtime_error on malformed input.
task::Scenario decode_scenario(std::string_view text);

}  // namespace crowdnav::session
