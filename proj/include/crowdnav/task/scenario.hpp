#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/agent.hpp"
#include "crowdnav/grid.hpp"

namespace crowdnav::task {

inline constexpr const char* kScenarioSchema = "crowdnav.scenario/1";

inline constexpr double kAvatarRadius = 0.3;
inline constexpr double kNpcRadius = 0.3;
inline constexpr double kRobotRadius = 0.25;
inline constexpr double kNpcDesiredSpeed = 1.4;

struct NpcSpec {
  Pose2D start{};
  Pose2D goal{};
};

struct Landmark {
  Pose2D pose{};
  std::string tag;
};

/// One trial: map, who starts where, and where everyone is heading.
struct Scenario {
  std::string id;
  std::string environment;  // "warehouse", "lab", ...
  std::string map_ref;  // as written in the file, relative to it
  std::filesystem::path map_path;
  std::shared_ptr<const OccupancyGrid> map;
  Pose2D avatar_start{};
  Pose2D avatar_goal{};
  Pose2D robot_start{};
  Pose2D robot_goal{};
  Landmark landmark{};
  std::vector<NpcSpec> npcs;
  double time_limit = 300.0;  // s
  std::uint64_t seed = 0;

  /// Initial agents: avatar id 0, robot id 1, NPCs from 2. NPC desired speed
  /// is jittered by `session_seed` so each session's crowd differs.
  std::vector<AgentState> initial_agents(std::uint64_t session_seed) const;
};

/// A scenario file could not be parsed; `fields` names what is missing or malformed.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, std::vector<std::string> fields)
      : std::runtime_error(what), fields_(std::move(fields)) {}
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  std::vector<std::string> fields_;
};

/// Parses a scenario file and loads the referenced map (relative to the file).
Scenario load_scenario(const std::filesystem::path& path);

/// Parses scenario text; `base_dir` resolves the map path.
Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir);

/// Serialises a scenario back to the file format.
std::string format_scenario(const Scenario& scenario);

/// Checks every scenario invariant against the grid, including planner
/// reachability of every goal. Returns human-readable violations; empty means ok.
std::vector<std::string> validate_scenario(const Scenario& scenario, const OccupancyGrid& grid);

/// All scenarios under a directory, keyed by id.
class ScenarioCatalog {
 public:
  ScenarioCatalog() = default;
  static ScenarioCatalog load_dir(const std::filesystem::path& dir);

  void add(Scenario s);
  const Scenario* find(const std::string& id) const;
  const std::map<std::string, Scenario>& all() const { return scenarios_; }
  std::vector<const Scenario*> by_environment(const std::string& env) const;

 private:
  std::map<std::string, Scenario> scenarios_;
};

}  // namespace crowdnav::task
