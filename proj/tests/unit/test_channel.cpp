#include <gtest/gtest.h>

#include <thread>

#include "crowdnav/session/channel.hpp"

using namespace crowdnav;
using namespace crowdnav::session;

TEST(Channel, AttachSeesHelloAndLatestSnapshot) {
  SessionChannel ch("hello");
  ch.publish("snap1", true);
  ch.publish("event", false);
  ch.publish("snap2", true);
  int notified = 0;
  auto a = ch.attach([&] { ++notified; });
  EXPECT_EQ(a.hello, "hello");
  EXPECT_EQ(a.snapshot, "snap2");
  EXPECT_FALSE(a.ended);
  bool ended = false;
  EXPECT_TRUE(ch.read(a.cursor, ended).empty());  // attach starts after the existing frames
  ch.publish("snap3", true);
  EXPECT_EQ(notified, 1);
  EXPECT_EQ(ch.read(a.cursor, ended), std::vector<std::string>{"snap3"});
  EXPECT_EQ(ch.attached(), 1u);
  ch.detach(a.token);
  EXPECT_EQ(ch.attached(), 0u);
  ch.publish("snap4", true);
  EXPECT_EQ(notified, 1);
}

TEST(Channel, CloseEndsReaders) {
  SessionChannel ch("h");
  auto a = ch.attach([] {});
  ch.publish("x", false);
  ch.close("end");
  ch.publish("ignored", false);
  ch.close("ignored");
  bool ended = false;
  EXPECT_EQ(ch.read(a.cursor, ended), (std::vector<std::string>{"x", "end"}));
  EXPECT_TRUE(ended);
  EXPECT_TRUE(ch.attach([] {}).ended);
}

TEST(Channel, SlowReaderSkipsBeyondBacklog) {
  SessionChannel ch("h", 4);
  std::uint64_t cursor = 0;
  for (int i = 0; i < 10; ++i) ch.publish(std::to_string(i), false);
  bool ended = false;
  EXPECT_EQ(ch.read(cursor, ended), (std::vector<std::string>{"6", "7", "8", "9"}));
}

TEST(Channel, RealtimeKeysAreLatestState) {
  SessionChannel ch("h");
  EXPECT_FALSE(ch.current_keys().any());
  ch.submit({AvatarCommand::from_keys("W"), std::nullopt});
  ch.submit({AvatarCommand::from_keys("D"), std::nullopt});
  EXPECT_EQ(ch.current_keys(), AvatarCommand::from_keys("D"));
}

TEST(Channel, LockstepWaitsForMatchingAck) {
  SessionChannel ch("h");
  std::optional<AvatarCommand> got;
  std::thread worker([&] { got = ch.wait_keys(5); });
  ch.submit({AvatarCommand::from_keys("A"), 4});  // stale ack: ignored by the waiter
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  ch.submit({AvatarCommand::from_keys("S"), 5});
  worker.join();
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, AvatarCommand::from_keys("S"));
}

TEST(Channel, StopWakesWaiters) {
  SessionChannel ch("h");
  std::optional<AvatarCommand> got = AvatarCommand::from_keys("W");
  bool slept = true;
  std::thread a([&] { got = ch.wait_keys(1); });
  std::thread b([&] { slept = ch.sleep_until(std::chrono::steady_clock::now() + std::chrono::hours(1)); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  ch.request_stop();
  a.join();
  b.join();
  EXPECT_FALSE(got);
  EXPECT_FALSE(slept);
  EXPECT_TRUE(ch.stop_requested());
}
