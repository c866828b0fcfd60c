#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "crowdnav/session/manager.hpp"
#include "crowdnav/telemetry/summary.hpp"
#include "support/oracles.hpp"

using namespace crowdnav;
using namespace crowdnav::session;
using namespace std::chrono_literals;

namespace {

struct FakeClock {
  Clock::time_point t = Clock::time_point{} + 1000h;
  std::function<Clock::time_point()> fn() {
    return [this] { return t; };
  }
};

const task::ScenarioCatalog& scenarios() {
  static const auto cat = task::ScenarioCatalog::load_dir(std::filesystem::path(CROWDNAV_ASSET_DIR) / "scenarios");
  return cat;
}

HostConfig config(const std::filesystem::path& dir, int max = 10) {
  HostConfig c;
  c.host_id = "h1";
  c.max_sessions = max;
  c.data_dir = dir;
  c.pacing = Pacing::lockstep;  // workers idle until acknowledged
  c.lockstep_wall_factor = 1.0;
  return c;
}

LaunchRequest req(const std::string& user, const std::string& scenario = "lab-1") {
  LaunchRequest r;
  r.user_id = user;
  r.scenario_id = scenario;
  return r;
}

}  // namespace

TEST(Manager, NewUserPendingThenAttach) {
  const auto dir = oracle::scratch_dir("mgr-attach");
  FakeClock clock;
  SessionManager m(config(dir), scenarios(), {false, clock.fn()});
  EXPECT_EQ(m.host_status().running, 0);
  EXPECT_EQ(m.host_status().queued, 0);
  const auto first = m.handle_session_request(req("u1"));
  ASSERT_EQ(first.kind, SessionOutcome::Kind::pending);
  EXPECT_EQ(first.session_id, "h1.u1.0.1");
  EXPECT_EQ(m.session(first.session_id)->state, SessionState::queued);
  clock.t += 3s;
  const auto again = m.handle_session_request(req("u1"));
  EXPECT_EQ(again.kind, SessionOutcome::Kind::pending);
  EXPECT_EQ(again.session_id, first.session_id);
  EXPECT_EQ(m.launch_next(), first.session_id);
  const auto attached = m.handle_session_request(req("u1"));
  EXPECT_EQ(attached.kind, SessionOutcome::Kind::attach);
  EXPECT_EQ(attached.session_id, first.session_id);
  EXPECT_EQ(m.host_status().running, 1);
  EXPECT_TRUE(m.channel(first.session_id));
  m.shutdown();
  std::filesystem::remove_all(dir);
}

TEST(Manager, CapacityRejectsWithRetryHint) {
  const auto dir = oracle::scratch_dir("mgr-cap");
  FakeClock clock;
  SessionManager m(config(dir), scenarios(), {false, clock.fn()});
  for (int i = 0; i < 10; ++i) {
    ASSERT_EQ(m.handle_session_request(req("u" + std::to_string(i))).kind, SessionOutcome::Kind::pending);
    m.launch_next();
  }
  EXPECT_EQ(m.host_status().running, 10);
  const auto r = m.handle_session_request(req("late"));
  EXPECT_EQ(r.kind, SessionOutcome::Kind::rejected);
  EXPECT_EQ(r.reason, "capacity");
  EXPECT_GT(r.retry_after, 0.0);
  m.shutdown();
  std::filesystem::remove_all(dir);
}

TEST(Manager, BadRequests) {
  const auto dir = oracle::scratch_dir("mgr-bad");
  SessionManager m(config(dir), scenarios(), {false});
  for (const auto& r : {req("u", "no-such"), req("../x")}) {
    const auto out = m.handle_session_request(r);
    EXPECT_EQ(out.kind, SessionOutcome::Kind::rejected);
    EXPECT_EQ(out.reason, "bad_request");
  }
  auto wall = req("u");
  wall.robot_goal = Pose2D{0.1, 0.1, 0};
  EXPECT_EQ(m.handle_session_request(wall).reason, "bad_request");
  auto trial = req("u", "");
  trial.trial = 6;
  EXPECT_EQ(m.handle_session_request(trial).reason, "bad_request");
  EXPECT_EQ(m.host_status().queued, 0);
  std::filesystem::remove_all(dir);
}

TEST(Manager, TrialSequenceChoosesScenario) {
  const auto dir = oracle::scratch_dir("mgr-trial");
  SessionManager m(config(dir), scenarios(), {false});
  auto r = req("u", "");
  r.trial = 3;
  const auto out = m.handle_session_request(r);
  ASSERT_EQ(out.kind, SessionOutcome::Kind::pending);
  EXPECT_EQ(out.session_id, "h1.u.3.1");
  EXPECT_NE(scenarios().find(m.session(out.session_id)->scenario_id), nullptr);
  std::filesystem::remove_all(dir);
}

TEST(Manager, FifoLaunchOrder) {
  const auto dir = oracle::scratch_dir("mgr-fifo");
  auto cfg = config(dir);
  cfg.launch_lanes = 1;
  cfg.reap_period = 0;
  std::vector<std::string> ids;
  {
    SessionManager m(cfg, scenarios());
    for (int i = 0; i < 5; ++i) ids.push_back(m.handle_session_request(req("f" + std::to_string(i))).session_id);
    for (int spin = 0; spin < 500 && m.host_status().running < 5; ++spin) std::this_thread::sleep_for(10ms);
    ASSERT_EQ(m.host_status().running, 5);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto info = m.session(ids[i]);
      EXPECT_EQ(info->launch_seq, i + 1);
      if (i > 0) {
        EXPECT_GE(*info->launched_at, *m.session(ids[i - 1])->launched_at);
      }
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(Manager, ReapAtDeadlineNotBefore) {
  const auto dir = oracle::scratch_dir("mgr-reap");
  FakeClock clock;
  SessionManager m(config(dir), scenarios(), {false, clock.fn()});
  const auto id = m.handle_session_request(req("u")).session_id;
  const auto created = clock.t;
  m.launch_next();
  EXPECT_TRUE(m.reap_expired(created + 299s).empty());
  EXPECT_EQ(m.session(id)->state, SessionState::running);
  EXPECT_EQ(m.reap_expired(created + 300s), std::vector<std::string>{id});
  const auto info = m.session(id);
  EXPECT_EQ(info->state, SessionState::expired);
  EXPECT_EQ(info->outcome, telemetry::Outcome::expired);
  const auto st = m.host_status();
  EXPECT_EQ(st.running, 0);
  EXPECT_EQ(st.live_workers, 0u);
  const auto summary = telemetry::read_summary_file(dir / (id + ".summary"));
  EXPECT_TRUE(summary.timed_out);
  EXPECT_FALSE(summary.partial);
  EXPECT_EQ(telemetry::read_log((dir / (id + ".log")).string()).corrupt_lines, 0u);
  // Slot released: same user gets a fresh session.
  EXPECT_NE(m.handle_session_request(req("u")).session_id, id);
  std::filesystem::remove_all(dir);
}

TEST(Manager, UnwritableDataDirClosesWithIoFailure) {
  const auto dir = oracle::scratch_dir("mgr-io");
  std::ofstream(dir / "file") << "x";
  SessionManager m(config(dir / "file" / "sub", 1), scenarios(), {false});
  const auto id = m.handle_session_request(req("u")).session_id;
  m.launch_next();
  const auto info = m.session(id);
  EXPECT_EQ(info->state, SessionState::closed);
  EXPECT_EQ(info->close_reason, "io_failure");
  EXPECT_EQ(m.handle_session_request(req("v")).kind, SessionOutcome::Kind::pending);  // slot freed
  std::filesystem::remove_all(dir);
}

TEST(Manager, ShutdownClosesNotExpired) {
  const auto dir = oracle::scratch_dir("mgr-done");
  auto cfg = config(dir);
  cfg.pacing = Pacing::realtime;
  cfg.tick_rate = 1000;
  SessionManager m(cfg, scenarios(), {false});
  const auto id = m.handle_session_request(req("u")).session_id;
  m.launch_next();
  // Nobody presses keys, so the session can only end when stopped.
  m.shutdown();
  const auto info = m.session(id);
  EXPECT_EQ(info->state, SessionState::closed);
  EXPECT_EQ(info->outcome, telemetry::Outcome::shutdown);
  const auto s = telemetry::read_summary_file(dir / (id + ".summary"));
  EXPECT_FALSE(s.timed_out);
  EXPECT_EQ(m.handle_session_request(req("x")).reason, "capacity");
  std::filesystem::remove_all(dir);
}

TEST(Manager, ConcurrentStormNeverExceedsCapacity) {
  const auto dir = oracle::scratch_dir("mgr-storm");
  auto cfg = config(dir);
  SessionManager m(cfg, scenarios());
  std::atomic<int> pending{0}, rejected{0}, max_seen{0};
  std::atomic<bool> done{false};
  std::thread sampler([&] {
    while (!done) {
      const auto st = m.host_status();
      max_seen = std::max(max_seen.load(), st.running + st.launching + st.queued);
      std::this_thread::sleep_for(1ms);
    }
  });
  std::vector<std::thread> clients;
  for (int i = 0; i < 50; ++i)
    clients.emplace_back([&, i] {
      const auto out = m.handle_session_request(req("s" + std::to_string(i)));
      (out.kind == SessionOutcome::Kind::rejected ? rejected : pending)++;
    });
  for (auto& t : clients) t.join();
  for (int spin = 0; spin < 500 && m.host_status().running < 10; ++spin) std::this_thread::sleep_for(10ms);
  done = true;
  sampler.join();
  EXPECT_EQ(pending.load(), 10);
  EXPECT_EQ(rejected.load(), 40);
  EXPECT_EQ(m.host_status().running, 10);
  EXPECT_LE(max_seen.load(), 10);
  m.shutdown();
  EXPECT_EQ(m.live_workers(), 0u);
  std::filesystem::remove_all(dir);
}
