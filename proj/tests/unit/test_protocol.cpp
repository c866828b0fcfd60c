#include <gtest/gtest.h>

#include "crowdnav/session/manager.hpp"
#include "crowdnav/session/protocol.hpp"
#include "crowdnav/task/scenario.hpp"

using namespace crowdnav;
using namespace crowdnav::session;

using Params = std::vector<std::pair<std::string, std::string>>;

TEST(ClientFrames, KeysAndPing) {
  const auto k = decode_client(R"({"t":"keys","down":["W","D"],"ack":12})");
  ASSERT_TRUE(k);
  const auto& keys = std::get<KeysMessage>(*k);
  EXPECT_TRUE(keys.command.w && keys.command.d && !keys.command.a && !keys.command.s);
  EXPECT_EQ(keys.ack, 12u);
  const auto p = decode_client(R"({"t":"ping","id":3})");
  ASSERT_TRUE(p);
  EXPECT_EQ(std::get<PingMessage>(*p).id, 3);
  for (const ClientMessage& m : {ClientMessage{KeysMessage{AvatarCommand::from_keys("AS"), std::nullopt}},
                                 ClientMessage{KeysMessage{AvatarCommand{}, 7}}, ClientMessage{PingMessage{9}}})
    EXPECT_EQ(decode_client(encode_client(m)), m);
}

TEST(ClientFrames, Malformed) {
  for (const char* bad : {"", "{", "[]", R"({"t":"keys"})", R"({"t":"keys","down":["Q"]})",
                          R"({"t":"keys","down":"W"})", R"({"t":"shell","cmd":"rm"})", R"({"t":"ping"})"})
    EXPECT_FALSE(decode_client(bad)) << bad;
}

TEST(ServerFrames, RoundTrip) {
  HelloMessage h;
  h.session_id = "h1.u.0.1";
  h.user_id = "u";
  h.scenario_id = "lab-1";
  h.pacing = "lockstep";
  h.time_limit = 300;
  h.landmark = {6, 1};
  h.landmark_tag = "charging dock";
  SnapshotMessage s;
  s.tick = 40;
  s.time = 2.0;
  s.phase = "find_robot";
  s.agents = {{0, AgentKind::avatar, 1, 2, 0.5, 0, 0, 0.3}};
  const auto hb = decode_server(encode_server(h));
  ASSERT_TRUE(hb);
  EXPECT_EQ(std::get<HelloMessage>(*hb).landmark_tag, "charging dock");
  EXPECT_EQ(std::get<HelloMessage>(*hb).landmark, h.landmark);
  const auto sb = decode_server(encode_server(s));
  ASSERT_TRUE(sb);
  EXPECT_EQ(std::get<SnapshotMessage>(*sb).agents, s.agents);
  EXPECT_EQ(std::get<SnapshotMessage>(*sb).tick, 40u);
  const auto eb = decode_server(encode_server(EndMessage{"completed", "CN-1"}));
  ASSERT_TRUE(eb);
  EXPECT_EQ(std::get<EndMessage>(*eb).code, "CN-1");
  EXPECT_FALSE(decode_server("nope"));
}

TEST(CompletionCode, StablePerSession) {
  EXPECT_EQ(completion_code("h1.u.0.1"), completion_code("h1.u.0.1"));
  EXPECT_NE(completion_code("h1.u.0.1"), completion_code("h1.u.0.2"));
  EXPECT_EQ(completion_code("x").rfind("CN-", 0), 0u);
}

TEST(LaunchRequest, AllowlistAndFormats) {
  const auto ok = parse_launch_request({{"user_id", "u-1"}, {"scenario", "lab-1"}, {"trial", "2"},
                                        {"robot_goal", "1.5,2,0.3"}, {"avatar_start", "1,1"}});
  ASSERT_TRUE(std::holds_alternative<LaunchRequest>(ok));
  const auto& r = std::get<LaunchRequest>(ok);
  EXPECT_EQ(r.user_id, "u-1");
  EXPECT_EQ(r.trial, 2);
  EXPECT_DOUBLE_EQ(r.robot_goal->theta, 0.3);
  EXPECT_DOUBLE_EQ(r.avatar_start->y, 1.0);

  auto reason = [](const Params& p) {
    const auto v = parse_launch_request(p);
    return std::holds_alternative<std::string>(v) ? std::get<std::string>(v) : std::string();
  };
  EXPECT_EQ(reason({{"user_id", "u"}, {"cmd", "rm"}}), "parameter not allowed: cmd");
  EXPECT_EQ(reason({{"scenario", "lab-1"}}), "missing user_id");
  EXPECT_EQ(reason({{"user_id", "u"}, {"user_id", "v"}}), "duplicate parameter: user_id");
  EXPECT_FALSE(reason({{"user_id", "../etc"}}).empty());
  EXPECT_FALSE(reason({{"user_id", std::string(65, 'a')}}).empty());
  EXPECT_FALSE(reason({{"user_id", "u"}, {"trial", "-1"}}).empty());
  EXPECT_FALSE(reason({{"user_id", "u"}, {"trial", "1x"}}).empty());
  EXPECT_FALSE(reason({{"user_id", "u"}, {"robot_goal", "1"}}).empty());
  EXPECT_FALSE(reason({{"user_id", "u"}, {"robot_goal", "1,2,3,4"}}).empty());
  EXPECT_FALSE(reason({{"user_id", "u"}, {"robot_goal", "1,nan"}}).empty());
}

TEST(ScenarioPayload, RoundTrip) {
  const auto s = task::load_scenario(std::filesystem::path(CROWDNAV_ASSET_DIR) / "scenarios" / "lab-2.yaml");
  const auto back = decode_scenario(encode_scenario(s));
  EXPECT_EQ(back.id, s.id);
  EXPECT_EQ(back.robot_goal, s.robot_goal);
  EXPECT_EQ(back.landmark.tag, s.landmark.tag);
  ASSERT_TRUE(back.map);
  EXPECT_EQ(back.map->cells(), s.map->cells());
  EXPECT_THROW(decode_scenario("{}"), std::runtime_error);
}
