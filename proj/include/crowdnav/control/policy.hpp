#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "crowdnav/nav/navigator.hpp"
#include "crowdnav/session/protocol.hpp"
#include "crowdnav/task/scenario.hpp"

namespace crowdnav::control {

enum class PolicyKind { compliant, idle, wanderer };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy(std::string_view text);

/// Key set for the 8-way direction closest to `dir`; no keys for a zero vector.
AvatarCommand keys_toward(Vec2 dir);

/// Scripted participant: turns each snapshot into the key state to hold.
class BotPolicy {
 public:
  virtual ~BotPolicy() = default;
  virtual AvatarCommand decide(const session::SnapshotMessage& snap) = 0;
};

/// Never presses a key.
class IdlePolicy final : public BotPolicy {
 public:
  AvatarCommand decide(const session::SnapshotMessage&) override { return {}; }
};

/// Holds a random key set (or none) for one second at a time.
class WandererPolicy final : public BotPolicy {
 public:
  explicit WandererPolicy(std::uint64_t seed) : rng_(seed) {}
  AvatarCommand decide(const session::SnapshotMessage& snap) override;

 private:
  std::mt19937_64 rng_;
  double switch_at_ = -1.0;
  AvatarCommand current_{};
};

/// Does the three tasks: walks to the robot, follows it at 1.2 to 1.5 m,
/// then walks to the landmark. Routes come from the pedestrian planner on
/// the scenario map; moves are quantized to the eight key directions.
class CompliantPolicy final : public BotPolicy {
 public:
  CompliantPolicy(const task::Scenario& scenario, int avatar_id = 0, int robot_id = 1);
  AvatarCommand decide(const session::SnapshotMessage& snap) override;

 private:
  Vec2 steer(Vec2 from, Vec2 target, double now);

  std::shared_ptr<const OccupancyGrid> grid_;
  nav::PedestrianRouter router_;
  Vec2 landmark_;
  int avatar_id_;
  int robot_id_;
  std::vector<Vec2> route_;
  std::size_t next_ = 0;
  std::optional<Vec2> routed_to_;
  double routed_at_ = -1e9;
  Vec2 progress_anchor_{};
  double progress_time_ = 0.0;
  double detour_until_ = -1.0;
  Vec2 detour_{};
};

std::unique_ptr<BotPolicy> make_policy(PolicyKind kind, const task::Scenario& scenario, std::uint64_t seed);

}  // namespace crowdnav::control
