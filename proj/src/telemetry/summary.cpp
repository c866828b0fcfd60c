#include "crowdnav/telemetry/summary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace crowdnav::telemetry {

using nlohmann::json;

Zone classify_zone(double distance) {
  if (distance < kIntimateZone) return Zone::intimate;
  if (distance < kPersonalZone) return Zone::personal;
  return Zone::none;
}

double surface_distance(const AgentSample& a, const AgentSample& b) {
  return std::max(0.0, std::hypot(a.x - b.x, a.y - b.y) - a.radius - b.radius);
}

void SummaryBuilder::add(const LogRecord& record) {
  if (const auto* h = std::get_if<HeaderRecord>(&record)) {
    saw_header_ = true;
    summary_.session_id = h->session_id;
    summary_.scenario_id = h->scenario_id;
    summary_.user_id = h->user_id;
    if (h->avatar_start && !avatar_start_) avatar_start_ = {h->avatar_start->x, h->avatar_start->y};
    return;
  }
  if (const auto* t = std::get_if<TickRecord>(&record)) {
    if (last_tick_ && t->tick <= *last_tick_) {
      summary_.partial = true;
      return;
    }
    last_tick_ = t->tick;
    ++summary_.tick_records;
    const AgentSample* avatar = nullptr;
    const AgentSample* robot = nullptr;
    for (const auto& a : t->agents) {
      if (a.kind == AgentKind::avatar && !avatar) avatar = &a;
      if (a.kind == AgentKind::robot && !robot) robot = &a;
    }
    if (avatar) {
      if (!avatar_start_) avatar_start_ = {avatar->x, avatar->y};
      const double disp = std::hypot(avatar->x - avatar_start_->first, avatar->y - avatar_start_->second);
      summary_.max_displacement = std::max(summary_.max_displacement, disp);
    }
    if (avatar && robot) {
      const double d = surface_distance(*avatar, *robot);
      if (!summary_.min_robot_distance || d < *summary_.min_robot_distance) summary_.min_robot_distance = d;
    }
    return;
  }
  if (const auto* e = std::get_if<EventRecord>(&record)) {
    if (e->kind == "collision") {
      ++summary_.collisions[e->pair_kind];
      if (e->push) ++summary_.push_count;
    } else if (e->kind == "phase" && !e->completed.empty()) {
      if (!summary_.phase_times.contains(e->completed)) summary_.phase_times[e->completed] = e->sim_time;
    }
    return;
  }
  if (const auto* end = std::get_if<EndRecord>(&record)) {
    saw_end_ = true;
    end_outcome_ = end->outcome;
    end_degraded_ = end->degraded;
  }
}

MetricsSummary SummaryBuilder::finish(std::optional<Outcome> outcome) const {
  MetricsSummary s = summary_;
  s.outcome = outcome ? *outcome : end_outcome_;
  if (!outcome && !saw_end_) s.partial = true;
  if (!saw_header_ || end_degraded_) s.partial = true;
  if (s.min_robot_distance) {
    const Zone z = classify_zone(*s.min_robot_distance);
    s.intimate_incursion = z == Zone::intimate;
    s.personal_incursion = z != Zone::none;
  }
  s.moved = s.max_displacement > kMoveEpsilon;
  s.timed_out = s.outcome == Outcome::expired;
  s.robot_found = s.phase_times.contains("find_robot");
  s.completed = s.phase_times.contains("reach_landmark");
  return s;
}

MetricsSummary summarize(const std::vector<LogRecord>& records, std::optional<Outcome> outcome) {
  SummaryBuilder b;
  for (const auto& r : records) b.add(r);
  return b.finish(outcome);
}

MetricsSummary summarize_log_file(const std::filesystem::path& log_path) {
  const ParsedLog log = read_log(log_path.string());
  SummaryBuilder b;
  for (const auto& r : log.records) b.add(r);
  if (log.corrupt_lines > 0 || log.truncated_tail) b.mark_partial();
  MetricsSummary s = b.finish();
  if (s.session_id.empty()) s.session_id = log_path.stem().string();
  return s;
}

std::string encode_summary(const MetricsSummary& s) {
  json j;
  j["schema"] = "crowdnav.summary/1";
  j["session_id"] = s.session_id;
  j["scenario"] = s.scenario_id;
  j["user"] = s.user_id;
  j["min_robot_distance"] = s.min_robot_distance ? json(*s.min_robot_distance) : json(nullptr);
  j["intimate_incursion"] = s.intimate_incursion;
  j["personal_incursion"] = s.personal_incursion;
  j["collisions"] = s.collisions;
  j["push_count"] = s.push_count;
  j["max_displacement"] = s.max_displacement;
  j["moved"] = s.moved;
  j["timed_out"] = s.timed_out;
  j["robot_found"] = s.robot_found;
  j["completed"] = s.completed;
  j["phase_times"] = s.phase_times;
  j["outcome"] = to_string(s.outcome);
  j["tick_records"] = s.tick_records;
  j["partial"] = s.partial;
  return j.dump(2) + "\n";
}

MetricsSummary decode_summary(const std::string& text) {
  const json j = json::parse(text);
  MetricsSummary s;
  s.session_id = j.at("session_id").get<std::string>();
  s.scenario_id = j.value("scenario", "");
  s.user_id = j.value("user", "");
  if (!j.at("min_robot_distance").is_null()) s.min_robot_distance = j.at("min_robot_distance").get<double>();
  s.intimate_incursion = j.at("intimate_incursion").get<bool>();
  s.personal_incursion = j.at("personal_incursion").get<bool>();
  s.collisions = j.at("collisions").get<std::map<std::string, int>>();
  s.push_count = j.at("push_count").get<int>();
  s.max_displacement = j.at("max_displacement").get<double>();
  s.moved = j.at("moved").get<bool>();
  s.timed_out = j.at("timed_out").get<bool>();
  s.robot_found = j.at("robot_found").get<bool>();
  s.completed = j.at("completed").get<bool>();
  s.phase_times = j.at("phase_times").get<std::map<std::string, double>>();
  s.outcome = parse_outcome(j.at("outcome").get<std::string>());
  s.tick_records = j.at("tick_records").get<std::size_t>();
  s.partial = j.at("partial").get<bool>();
  return s;
}

std::filesystem::path write_summary_file(const std::filesystem::path& dir, const MetricsSummary& s) {
  const auto final_path = dir / (s.session_id + ".summary");
  const auto tmp = dir / (s.session_id + ".summary.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write summary " + tmp.string());
    out << encode_summary(s);
    out.flush();
    if (!out) throw std::runtime_error("cannot write summary " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path);
  return final_path;
}

MetricsSummary read_summary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open summary " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return decode_summary(buf.str());
}

std::vector<std::string> recover_orphan_logs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> logs;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".log") logs.push_back(entry.path());
  std::sort(logs.begin(), logs.end());
  std::vector<std::string> recovered;
  for (const auto& log : logs) {
    const auto summary_path = dir / (log.stem().string() + ".summary");
    if (std::filesystem::exists(summary_path)) continue;
    MetricsSummary s = summarize_log_file(log);
    s.partial = true;
    s.session_id = log.stem().string();
    write_summary_file(dir, s);
    recovered.push_back(s.session_id);
  }
  return recovered;
}

}  // namespace crowdnav::telemetry
