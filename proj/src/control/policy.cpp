#include "crowdnav/control/policy.hpp"

#include <cmath>
#include <numbers>

#include "crowdnav/random.hpp"

namespace crowdnav::control {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::compliant: return "compliant";
    case PolicyKind::idle: return "idle";
    case PolicyKind::wanderer: return "wanderer";
  }
  return "idle";
}

std::optional<PolicyKind> parse_policy(std::string_view text) {
  for (auto k : {PolicyKind::compliant, PolicyKind::idle, PolicyKind::wanderer})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

AvatarCommand keys_toward(Vec2 dir) {
  if (dir.norm() < 1e-9) return {};
  static const char* sectors[8] = {"D", "WD", "W", "WA", "A", "SA", "S", "SD"};
  const double angle = std::atan2(dir.y, dir.x);
  int k = static_cast<int>(std::lround(angle / (std::numbers::pi / 4)));
  k = ((k % 8) + 8) % 8;
  return AvatarCommand::from_keys(sectors[k]);
}

AvatarCommand WandererPolicy::decide(const session::SnapshotMessage& snap) {
  if (snap.time >= switch_at_) {
    static const char* options[9] = {"", "W", "A", "S", "D", "WA", "WD", "SA", "SD"};
    current_ = AvatarCommand::from_keys(options[uniform_below(rng_, 9)]);
    switch_at_ = snap.time + 1.0;
  }
  return current_;
}

CompliantPolicy::CompliantPolicy(const task::Scenario& scenario, int avatar_id, int robot_id)
    : grid_(scenario.map),
      router_(scenario.map, task::kAvatarRadius),
      landmark_(scenario.landmark.pose.position()),
      avatar_id_(avatar_id),
      robot_id_(robot_id) {}

Vec2 CompliantPolicy::steer(Vec2 from, Vec2 target, double now) {
  const bool stale = !routed_to_ || distance(*routed_to_, target) > 0.75 || now - routed_at_ > 2.0 || next_ >= route_.size();
  if (stale) {
    route_ = router_.route(from, target);
    next_ = 0;
    routed_to_ = target;
    routed_at_ = now;
  }
  if (route_.empty()) return target - from;
  while (next_ + 1 < route_.size() && distance(from, route_[next_]) < 0.3) ++next_;
  return route_[next_] - from;
}

AvatarCommand CompliantPolicy::decide(const session::SnapshotMessage& snap) {
  const telemetry::AgentSample* avatar = nullptr;
  const telemetry::AgentSample* robot = nullptr;
  for (const auto& a : snap.agents) {
    if (a.id == avatar_id_) avatar = &a;
    if (a.id == robot_id_) robot = &a;
  }
  if (!avatar || !robot) return {};
  const Vec2 a{avatar->x, avatar->y};
  const Vec2 r{robot->x, robot->y};
  const double now = snap.time;

  Vec2 dir{};
  if (snap.phase == "find_robot") {
    dir = steer(a, r, now);
  } else if (snap.phase == "follow_robot") {
    const double d = distance(a, r);
    const Vec2 heading{std::cos(robot->theta), std::sin(robot->theta)};
    const Vec2 rel = a - r;
    const double ahead = rel.x * heading.x + rel.y * heading.y;
    const double lateral = rel.x * heading.y - rel.y * heading.x;
    if (d < 2.0 && ahead > 0.0 && std::abs(lateral) < 0.9) {
      // Standing in the robot's way: step off its line.
      dir = lateral >= 0.0 ? Vec2{heading.y, -heading.x} : Vec2{-heading.y, heading.x};
    } else if (d > 1.5) {
      dir = steer(a, r, now);
    } else if (d < 1.2) {
      dir = rel;  // give the robot room
    }
  } else if (snap.phase == "reach_landmark") {
    if (distance(a, landmark_) > 0.3) dir = steer(a, landmark_, now);
  }
  if (dir.norm() < 1e-9) {
    progress_anchor_ = a;
    progress_time_ = now;
    return {};
  }

  // Unstick: no progress for 1.5 s while walking -> sidestep for 0.5 s.
  if (now < detour_until_) return keys_toward(detour_);
  if (distance(a, progress_anchor_) > 0.2) {
    progress_anchor_ = a;
    progress_time_ = now;
  } else if (now - progress_time_ > 1.5) {
    detour_ = Vec2{-dir.y, dir.x};
    if (static_cast<std::uint64_t>(now * 10) % 2 == 1) detour_ = detour_ * -1.0;
    detour_until_ = now + 0.5;
    progress_time_ = now;
    routed_to_.reset();
    return keys_toward(detour_);
  }
  return keys_toward(dir);
}

std::unique_ptr<BotPolicy> make_policy(PolicyKind kind, const task::Scenario& scenario, std::uint64_t seed) {
  switch (kind) {
    case PolicyKind::compliant: return std::make_unique<CompliantPolicy>(scenario);
    case PolicyKind::idle: return std::make_unique<IdlePolicy>();
    case PolicyKind::wanderer: return std::make_unique<WandererPolicy>(seed);
  }
  return std::make_unique<IdlePolicy>();
}

}  // namespace crowdnav::control
