#include "crowdnav/agent.hpp"

#include <algorithm>
#include <cctype>

namespace crowdnav {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::avatar: return "avatar";
    case AgentKind::npc: return "npc";
    case AgentKind::robot: return "robot";
  }
  return "npc";
}

std::optional<AgentKind> parse_agent_kind(std::string_view text) {
  if (text == "avatar") return AgentKind::avatar;
  if (text == "npc") return AgentKind::npc;
  if (text == "robot") return AgentKind::robot;
  return std::nullopt;
}

AvatarCommand AvatarCommand::from_keys(std::string_view keys) {
  AvatarCommand cmd;
  for (char ch : keys) {
    switch (std::toupper(static_cast<unsigned char>(ch))) {
      case 'W': cmd.w = true; break;
      case 'A': cmd.a = true; break;
      case 'S': cmd.s = true; break;
      case 'D': cmd.d = true; break;
      default: break;
    }
  }
  return cmd;
}

std::string AvatarCommand::keys() const {
  std::string out;
  if (w) out += 'W';
  if (a) out += 'A';
  if (s) out += 'S';
  if (d) out += 'D';
  return out;
}

Vec2 AvatarCommand::direction() const {
  const double x = (d ? 1.0 : 0.0) - (a ? 1.0 : 0.0);
  const double y = (w ? 1.0 : 0.0) - (s ? 1.0 : 0.0);
  if (x == 0.0 && y == 0.0) return {};
  if (x != 0.0 && y != 0.0) return Vec2{x, y} * std::numbers::sqrt2 * 0.5;
  return {x, y};
}

std::uint64_t pair_hash(int a, int b) {
  const auto lo = static_cast<std::uint32_t>(std::min(a, b));
  const auto hi = static_cast<std::uint32_t>(std::max(a, b));
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint32_t v : {lo, hi}) {
    for (int i = 0; i < 4; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

Vec2 coincident_direction(int self, int other) {
  const double frac = static_cast<double>(pair_hash(self, other) & 0xffffffffull) / 4294967296.0;
  const Vec2 u = unit_from_angle(frac * 2.0 * std::numbers::pi);
  return self < other ? u : -u;
}

}  // namespace crowdnav
