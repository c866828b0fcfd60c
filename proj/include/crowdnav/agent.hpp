#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "crowdnav/geometry.hpp"

namespace crowdnav {

enum class AgentKind : std::uint8_t { avatar, npc, robot };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> parse_agent_kind(std::string_view text);

struct AgentState {
  int id = 0;
  AgentKind kind = AgentKind::npc;
  Pose2D pose{};
  Vec2 velocity{};
  double radius = 0.3;
  Pose2D goal{};
  double desired_speed = 0.0;
};

/// Differential-drive velocity command.
struct RobotCommand {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s
  constexpr bool operator==(const RobotCommand&) const = default;
};

enum class CameraAction : std::uint8_t { none, raise, lower };

/// Key state sent by a participant. Movement is world-frame: W is +y, S is
/// -y, A is -x, D is +x. The camera action is client-side only.
struct AvatarCommand {
  bool w = false;
  bool a = false;
  bool s = false;
  bool d = false;
  CameraAction camera = CameraAction::none;

  /// Parses a key set such as "WD"; unknown characters are ignored.
  static AvatarCommand from_keys(std::string_view keys);
  std::string keys() const;

  /// Unit (or zero) world-frame direction; opposing keys cancel.
  Vec2 direction() const;
  bool any() const { return w || a || s || d; }
  constexpr bool operator==(const AvatarCommand&) const = default;
};

/// Order-independent 64-bit hash of an id pair (FNV-1a).
std::uint64_t pair_hash(int a, int b);

/// Deterministic unit vector pushing `self` away from `other` when their
/// centres coincide. Antisymmetric: the two agents get opposite directions.
Vec2 coincident_direction(int self, int other);

}  // namespace crowdnav
