#include "crowdnav/telemetry/aggregate.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace crowdnav::telemetry {

double Rate::percent() const {
  return denominator == 0 ? 0.0 : 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
}

DuplicateSessionError::DuplicateSessionError(const std::string& session_id, std::vector<std::string> sources)
    : std::runtime_error("duplicate session_id " + session_id), session_id_(session_id), sources_(std::move(sources)) {}

namespace {

void add(CohortGroup& g, const MetricsSummary& s) {
  ++g.sessions;
  auto count = [](Rate& r, bool hit) {
    ++r.denominator;
    if (hit) ++r.numerator;
  };
  count(g.timeout, s.timed_out);
  count(g.no_movement, !s.moved);
  count(g.intimate, s.intimate_incursion);
  count(g.personal, s.personal_incursion);
  count(g.completed, s.completed);
  count(g.robot_found, s.robot_found);
  count(g.partial, s.partial);
  for (const auto& [kind, n] : s.collisions) g.collisions += static_cast<std::size_t>(n);
  g.pushes += static_cast<std::size_t>(s.push_count);
}

}  // namespace

CohortReport aggregate(const std::vector<MetricsSummary>& summaries) {
  if (summaries.empty()) throw std::invalid_argument("aggregate needs at least one summary");
  std::set<std::string> seen;
  for (const auto& s : summaries)
    if (!seen.insert(s.session_id).second) throw DuplicateSessionError(s.session_id, {});
  CohortReport report;
  for (const auto& s : summaries) {
    add(report.overall, s);
    add(report.by_scenario[s.scenario_id], s);
  }
  return report;
}

std::vector<MetricsSummary> load_summaries(const std::vector<std::filesystem::path>& dirs) {
  std::vector<std::filesystem::path> files;
  for (const auto& dir : dirs)
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".summary") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::map<std::string, std::filesystem::path> origin;
  std::vector<MetricsSummary> out;
  for (const auto& f : files) {
    MetricsSummary s = read_summary_file(f);
    auto [it, fresh] = origin.emplace(s.session_id, f);
    if (!fresh) throw DuplicateSessionError(s.session_id, {it->second.string(), f.string()});
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, const Rate*>> rates(const CohortGroup& g) {
  return {{"timeout", &g.timeout},   {"no_movement", &g.no_movement}, {"intimate", &g.intimate},
          {"personal", &g.personal}, {"completed", &g.completed},     {"robot_found", &g.robot_found},
          {"partial", &g.partial}};
}

std::vector<std::pair<std::string, const CohortGroup*>> groups(const CohortReport& r) {
  std::vector<std::pair<std::string, const CohortGroup*>> out{{"all", &r.overall}};
  for (const auto& [id, g] : r.by_scenario) out.emplace_back(id, &g);
  return out;
}

}  // namespace

std::string format_report_csv(const CohortReport& report) {
  std::string out = "group,sessions,metric,numerator,denominator,percent\n";
  for (const auto& [name, g] : groups(report)) {
    for (const auto& [metric, r] : rates(*g))
      out += fmt::format("{},{},{},{},{},{:.2f}\n", name, g->sessions, metric, r->numerator, r->denominator,
                         r->percent());
    out += fmt::format("{},{},collisions,{},,\n", name, g->sessions, g->collisions);
    out += fmt::format("{},{},pushes,{},,\n", name, g->sessions, g->pushes);
  }
  return out;
}

std::string format_report_text(const CohortReport& report) {
  std::string out;
  for (const auto& [name, g] : groups(report)) {
    out += fmt::format("{} ({} sessions)\n", name, g->sessions);
    for (const auto& [metric, r] : rates(*g))
      out += fmt::format("  {:<12} {:>5}/{:<5} {:6.2f}%\n", metric, r->numerator, r->denominator, r->percent());
    out += fmt::format("  {:<12} {:>5}\n  {:<12} {:>5}\n", "collisions", g->collisions, "pushes", g->pushes);
  }
  return out;
}

}  // namespace crowdnav::telemetry
