#include <gtest/gtest.h>

#include <sstream>

#include "crowdnav/telemetry/aggregate.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;
using namespace crowdnav::telemetry;

namespace {

MetricsSummary summary(int i, const std::string& scenario = "lab-1") {
  MetricsSummary s;
  s.session_id = "h1.u" + std::to_string(i) + ".0.1";
  s.scenario_id = scenario;
  s.moved = true;
  return s;
}

// 372 sessions with the counts reported for the original study.
std::vector<MetricsSummary> study_cohort() {
  std::vector<MetricsSummary> v;
  for (int i = 0; i < 372; ++i) {
    auto s = summary(i, i % 2 ? "lab-1" : "warehouse-1");
    s.timed_out = i < 23;
    s.moved = !(i >= 100 && i < 108);
    s.intimate_incursion = i < 195;
    s.personal_incursion = i < 316;
    v.push_back(s);
  }
  return v;
}

}  // namespace

TEST(Aggregate, PublishedRatios) {
  const auto r = aggregate(study_cohort());
  EXPECT_EQ(r.overall.sessions, 372u);
  EXPECT_EQ(r.overall.timeout, (Rate{23, 372}));
  EXPECT_NEAR(r.overall.timeout.percent(), 6.18, 0.05);
  EXPECT_EQ(r.overall.no_movement, (Rate{8, 372}));
  EXPECT_NEAR(r.overall.no_movement.percent(), 2.15, 0.05);
  EXPECT_NEAR(r.overall.intimate.percent(), 52.4, 0.05);
  EXPECT_NEAR(r.overall.personal.percent(), 84.9, 0.05);
  ASSERT_EQ(r.by_scenario.size(), 2u);
  EXPECT_EQ(r.by_scenario.at("lab-1").sessions + r.by_scenario.at("warehouse-1").sessions, 372u);
}

TEST(Aggregate, RateConsistency) {
  const auto r = aggregate(study_cohort());
  for (const auto* g : {&r.overall, &r.by_scenario.at("lab-1"), &r.by_scenario.at("warehouse-1")}) {
    for (const Rate* x : {&g->timeout, &g->no_movement, &g->intimate, &g->personal, &g->completed})
      EXPECT_LE(x->numerator, x->denominator);
    EXPECT_LE(g->intimate.percent(), g->personal.percent());
  }
}

TEST(Aggregate, SingleSummaryRatesAreExtreme) {
  auto s = summary(1);
  s.timed_out = true;
  s.collisions["avatar-robot"] = 2;
  s.push_count = 1;
  const auto r = aggregate({s});
  for (const Rate* x : {&r.overall.timeout, &r.overall.no_movement, &r.overall.intimate, &r.overall.personal})
    EXPECT_TRUE(x->percent() == 0.0 || x->percent() == 100.0);
  EXPECT_EQ(r.overall.collisions, 2u);
  EXPECT_EQ(r.overall.pushes, 1u);
  EXPECT_EQ(Rate{}.percent(), 0.0);
}

TEST(Aggregate, EmptyAndDuplicates) {
  EXPECT_THROW(aggregate({}), std::invalid_argument);
  try {
    aggregate({summary(1), summary(2), summary(1)});
    FAIL();
  } catch (const DuplicateSessionError& e) {
    EXPECT_EQ(e.session_id(), "h1.u1.0.1");
  }
}

TEST(Aggregate, LoadAcrossHostDirsDetectsConflicts) {
  const auto root = oracle::scratch_dir("agg");
  std::filesystem::create_directories(root / "h1");
  std::filesystem::create_directories(root / "h2");
  write_summary_file(root / "h1", summary(1));
  write_summary_file(root / "h2", summary(2));
  EXPECT_EQ(load_summaries({root / "h1", root / "h2"}).size(), 2u);
  write_summary_file(root / "h2", summary(1));
  try {
    load_summaries({root / "h1", root / "h2"});
    FAIL();
  } catch (const DuplicateSessionError& e) {
    EXPECT_EQ(e.session_id(), "h1.u1.0.1");
    ASSERT_EQ(e.sources().size(), 2u);
    EXPECT_NE(e.sources()[0].find("h1"), std::string::npos);
    EXPECT_NE(e.sources()[1].find("h2"), std::string::npos);
  }
  std::filesystem::remove_all(root);
}

TEST(Aggregate, CsvHasOneRowPerMetric) {
  const auto csv = format_report_csv(aggregate(study_cohort()));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "group,sessions,metric,numerator,denominator,percent");
  int rows = 0;
  bool saw_timeout = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line == "all,372,timeout,23,372,6.18") saw_timeout = true;
  }
  EXPECT_EQ(rows, 3 * 9);
  EXPECT_TRUE(saw_timeout);
  EXPECT_NE(format_report_text(aggregate(study_cohort())).find("timeout"), std::string::npos);
}
