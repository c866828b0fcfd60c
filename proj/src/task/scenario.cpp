#include "crowdnav/task/scenario.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "crowdnav/nav/navigator.hpp"
#include "crowdnav/random.hpp"

namespace crowdnav::task {

namespace {

Pose2D parse_pose(const YAML::Node& node, const std::string& field, std::vector<std::string>& missing) {
  if (!node || !node.IsSequence() || node.size() < 2 || node.size() > 3) {
    missing.push_back(field);
    return {};
  }
  const double theta = node.size() == 3 ? node[2].as<double>() : 0.0;
  return Pose2D::make(node[0].as<double>(), node[1].as<double>(), theta);
}

YAML::Node pose_node(const Pose2D& p) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  n.push_back(p.x);
  n.push_back(p.y);
  n.push_back(p.theta);
  return n;
}

bool disc_free(const OccupancyGrid& grid, Pose2D p, double r) {
  return grid.contains(p.position()) && !grid.disc_hits_obstacle(p.position(), r);
}

}  // namespace

std::vector<AgentState> Scenario::initial_agents(std::uint64_t session_seed) const {
  std::vector<AgentState> agents;
  AgentState avatar;
  avatar.id = 0;
  avatar.kind = AgentKind::avatar;
  avatar.pose = avatar_start;
  avatar.radius = kAvatarRadius;
  avatar.goal = avatar_goal;
  avatar.desired_speed = 1.4;
  agents.push_back(avatar);

  AgentState robot;
  robot.id = 1;
  robot.kind = AgentKind::robot;
  robot.pose = robot_start;
  robot.radius = kRobotRadius;
  robot.goal = robot_goal;
  robot.desired_speed = 0.8;
  agents.push_back(robot);

  std::mt19937_64 rng(seed ^ session_seed);
  int id = 2;
  for (const auto& spec : npcs) {
    AgentState npc;
    npc.id = id++;
    npc.kind = AgentKind::npc;
    npc.pose = spec.start;
    npc.radius = kNpcRadius;
    npc.goal = spec.goal;
    npc.desired_speed = kNpcDesiredSpeed * uniform_real(rng, 0.85, 1.1);
    agents.push_back(npc);
  }
  return agents;
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node doc;
  try {
    doc = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what(), {});
  }
  if (!doc.IsMap()) throw ScenarioError("scenario must be a mapping", {});

  std::vector<std::string> missing;
  Scenario s;
  if (!doc["schema"] || doc["schema"].as<std::string>() != kScenarioSchema) missing.push_back("schema");
  auto str_field = [&](const char* key, std::string& out) {
    if (doc[key]) out = doc[key].as<std::string>();
    else missing.push_back(key);
  };
  str_field("id", s.id);
  str_field("environment", s.environment);
  std::string map_ref;
  str_field("map", map_ref);
  if (doc["time_limit"]) s.time_limit = doc["time_limit"].as<double>();
  if (doc["seed"]) s.seed = doc["seed"].as<std::uint64_t>();

  const YAML::Node avatar = doc["avatar"];
  const YAML::Node robot = doc["robot"];
  s.avatar_start = parse_pose(avatar ? avatar["start"] : YAML::Node(), "avatar.start", missing);
  s.avatar_goal = parse_pose(avatar ? avatar["goal"] : YAML::Node(), "avatar.goal", missing);
  s.robot_start = parse_pose(robot ? robot["start"] : YAML::Node(), "robot.start", missing);
  s.robot_goal = parse_pose(robot ? robot["goal"] : YAML::Node(), "robot.goal", missing);

  const YAML::Node landmark = doc["landmark"];
  if (!landmark) {
    missing.push_back("landmark");
  } else {
    s.landmark.pose = parse_pose(landmark["pose"], "landmark.pose", missing);
    if (landmark["tag"]) s.landmark.tag = landmark["tag"].as<std::string>();
    else missing.push_back("landmark.tag");
  }

  if (const YAML::Node npcs = doc["npcs"]) {
    for (std::size_t i = 0; i < npcs.size(); ++i) {
      const std::string prefix = "npcs[" + std::to_string(i) + "]";
      NpcSpec spec;
      spec.start = parse_pose(npcs[i]["start"], prefix + ".start", missing);
      spec.goal = parse_pose(npcs[i]["goal"], prefix + ".goal", missing);
      s.npcs.push_back(spec);
    }
  }

  if (!missing.empty()) {
    std::string msg = "scenario is missing or has malformed fields:";
    for (const auto& f : missing) msg += " " + f;
    throw ScenarioError(msg, missing);
  }

  s.map_ref = map_ref;
  s.map_path = base_dir / map_ref;
  try {
    s.map = std::make_shared<const OccupancyGrid>(OccupancyGrid::load(s.map_path));
  } catch (const MapError& e) {
    throw ScenarioError(e.what(), {"map"});
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string(), {});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

std::string format_scenario(const Scenario& s) {
  YAML::Node doc;
  doc["schema"] = kScenarioSchema;
  doc["id"] = s.id;
  doc["environment"] = s.environment;
  doc["map"] = s.map_ref.empty() ? s.map_path.string() : s.map_ref;
  doc["time_limit"] = s.time_limit;
  doc["seed"] = s.seed;
  doc["avatar"]["start"] = pose_node(s.avatar_start);
  doc["avatar"]["goal"] = pose_node(s.avatar_goal);
  doc["robot"]["start"] = pose_node(s.robot_start);
  doc["robot"]["goal"] = pose_node(s.robot_goal);
  doc["landmark"]["pose"] = pose_node(s.landmark.pose);
  doc["landmark"]["tag"] = s.landmark.tag;
  YAML::Node npcs(YAML::NodeType::Sequence);
  for (const auto& n : s.npcs) {
    YAML::Node e;
    e["start"] = pose_node(n.start);
    e["goal"] = pose_node(n.goal);
    npcs.push_back(e);
  }
  doc["npcs"] = npcs;
  YAML::Emitter out;
  out << doc;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::string> validate_scenario(const Scenario& s, const OccupancyGrid& grid) {
  std::vector<std::string> v;
  if (s.id.empty()) v.push_back("empty scenario id");
  if (!(s.time_limit > 0.0)) v.push_back("time_limit must be positive");
  if (!grid.is_closed()) v.push_back("map border is not closed");

  struct Placed {
    std::string name;
    Pose2D pose;
    double radius;
  };
  std::vector<Placed> starts{{"avatar start", s.avatar_start, kAvatarRadius}, {"robot start", s.robot_start, kRobotRadius}};
  for (std::size_t i = 0; i < s.npcs.size(); ++i)
    starts.push_back({"npc " + std::to_string(i) + " start", s.npcs[i].start, kNpcRadius});

  std::vector<Placed> all = starts;
  all.push_back({"avatar goal", s.avatar_goal, kAvatarRadius});
  all.push_back({"robot goal", s.robot_goal, kRobotRadius});
  all.push_back({"landmark", s.landmark.pose, kAvatarRadius});
  for (std::size_t i = 0; i < s.npcs.size(); ++i)
    all.push_back({"npc " + std::to_string(i) + " goal", s.npcs[i].goal, kNpcRadius});
  for (const auto& p : all)
    if (!disc_free(grid, p.pose, p.radius)) v.push_back(p.name + " is not in free space");

  for (std::size_t i = 0; i < starts.size(); ++i)
    for (std::size_t j = i + 1; j < starts.size(); ++j)
      if (distance(starts[i].pose.position(), starts[j].pose.position()) < starts[i].radius + starts[j].radius)
        v.push_back("initial overlap: " + starts[i].name + " and " + starts[j].name);

  const Vec2 as = s.avatar_start.position(), ag = s.avatar_goal.position();
  const Vec2 rs = s.robot_start.position(), rg = s.robot_goal.position();
  if (!(distance(as, rg) < distance(as, rs) && distance(rs, ag) < distance(rs, as)))
    v.push_back("avatar and robot goals are not opposite");

  auto shared = std::make_shared<const OccupancyGrid>(grid);
  nav::NavConfig nav_cfg;
  nav::Costmap robot_map(shared, nav_cfg.inflation_for(grid));
  try {
    nav::plan_global(robot_map, s.robot_start, s.robot_goal);
  } catch (const nav::UnreachableError&) {
    v.push_back("unreachable robot goal");
  }

  nav::PedestrianRouter walker(shared, kAvatarRadius);
  if (!walker.plan(as, ag)) v.push_back("unreachable avatar goal");
  if (!walker.plan(as, s.landmark.pose.position())) v.push_back("unreachable landmark");
  if (!walker.plan(as, rs)) v.push_back("robot start unreachable from avatar start");
  nav::PedestrianRouter npc_walker(shared, kNpcRadius);
  for (std::size_t i = 0; i < s.npcs.size(); ++i)
    if (!npc_walker.plan(s.npcs[i].start.position(), s.npcs[i].goal.position()))
      v.push_back("unreachable npc " + std::to_string(i) + " goal");
  return v;
}

ScenarioCatalog ScenarioCatalog::load_dir(const std::filesystem::path& dir) {
  ScenarioCatalog cat;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".yaml") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) cat.add(load_scenario(f));
  return cat;
}

void ScenarioCatalog::add(Scenario s) {
  const std::string id = s.id;
  if (!scenarios_.emplace(id, std::move(s)).second) throw ScenarioError("duplicate scenario id " + id, {"id"});
}

const Scenario* ScenarioCatalog::find(const std::string& id) const {
  auto it = scenarios_.find(id);
  return it == scenarios_.end() ? nullptr : &it->second;
}

std::vector<const Scenario*> ScenarioCatalog::by_environment(const std::string& env) const {
  std::vector<const Scenario*> out;
  for (const auto& [id, s] : scenarios_)
    if (s.environment == env) out.push_back(&s);
  return out;
}

}  // namespace crowdnav::task
