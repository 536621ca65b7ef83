#include <gtest/gtest.h>

#include <random>

#include "arthur/bus/inprocess.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/conditions/engine.hpp"
#include "arthur/conditions/service.hpp"
#include "arthur/authoring/service.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"
#include "../support/fixtures.hpp"

using namespace arthur;
using namespace arthur::conditions;
using arthur::testing::demo_cell;

namespace {

void add(Workstation& ws, const std::string& id, const std::string& kind, json props) {
  ComponentDescriptor d;
  d.id = id;
  d.kind = kind;
  d.properties = std::move(props);
  ws.components[id] = d;
}

InputEvent event(InputType type, const std::string& target, std::int64_t t) {
  InputEvent e;
  e.type = type;
  e.target = target;
  e.timestamp_ms = t;
  return e;
}

WorldState at(std::int64_t now) {
  WorldState w;
  w.now_ms = now;
  return w;
}

TEST(Conditions, ProximityBeyondThreeMeters) {
  auto ws = demo_cell();
  ws.anchors["robot-base"] = {"robot-base", "", {AnchorParent::Type::anchor, "t1-root"}, Pose::identity()};
  add(ws, "far", "proximity", {{"anchor-a", "user-head"}, {"anchor-b", "robot-base"}, {"threshold", 3.0}, {"direction", "beyond"}});
  auto w = at(0);
  // Tracker sits at (2, 1, 0.8); put the head 3.5 m away along x.
  w.body[BodyPart::head] = Pose::translation(5.5, 1.0, 0.8);
  auto r = evaluate_all(ws, w, nullptr);
  EXPECT_TRUE(r.is_active("far"));
  w.body[BodyPart::head] = Pose::translation(4.5, 1.0, 0.8);
  EXPECT_FALSE(evaluate_all(ws, w, nullptr).is_active("far"));
  w.body.clear();
  r = evaluate_all(ws, w, nullptr);
  EXPECT_FALSE(r.is_active("far"));
  EXPECT_EQ(r.notes.count("far"), 1u);
  EXPECT_EQ(r.invalid.count("far"), 0u);
}

TEST(Conditions, AndOfTwoPokesWithinWindow) {
  auto ws = demo_cell();
  add(ws, "blue", "indicator-3d", {{"color", "#0000FF"}});
  add(ws, "green", "indicator-3d", {{"color", "#00FF00"}});
  add(ws, "poke-blue", "poke", {{"target", "blue"}});
  add(ws, "poke-green", "poke", {{"target", "green"}});
  add(ws, "start", "and", {{"a", "poke-blue"}, {"b", "poke-green"}});
  add(ws, "nb", "not", {{"operand", "poke-blue"}});
  auto w = at(1000);
  w.events = {event(InputType::poke, "blue", 900), event(InputType::poke, "green", 1000)};
  auto r = evaluate_all(ws, w, nullptr);
  EXPECT_TRUE(r.is_active("start"));
  EXPECT_FALSE(r.is_active("nb"));
  w.events = {event(InputType::poke, "blue", 700), event(InputType::poke, "green", 1000)};
  r = evaluate_all(ws, w, nullptr);
  EXPECT_FALSE(r.is_active("start"));
  w.events.clear();
  EXPECT_TRUE(evaluate_all(ws, w, nullptr).is_active("nb"));
}

TEST(Conditions, RisingEdgeFiresOnce) {
  auto ws = demo_cell();
  add(ws, "red", "indicator-3d", {{"color", "#FF0000"}});
  add(ws, "poke-red", "poke", {{"target", "red"}});
  add(ws, "pp", "robot-play-pause", {{"agent", "ur5e"}, {"trigger", "poke-red"}});
  auto w = at(1000);
  w.events = {event(InputType::poke, "red", 1000)};
  const auto r1 = evaluate_all(ws, w, nullptr);
  ASSERT_EQ(r1.fired.size(), 1u);
  EXPECT_EQ(r1.fired[0].action, "pp");
  EXPECT_EQ(r1.fired[0].properties.at("agent"), "ur5e");
  w.now_ms = 1050;
  const auto r2 = evaluate_all(ws, w, &r1);
  EXPECT_TRUE(r2.is_active("poke-red"));
  EXPECT_TRUE(r2.fired.empty());
}

// Exhaustive truth tables, with workstation buttons as controllable operands.
TEST(Conditions, LogicMatchesBooleanOracle) {
  for (int n = 1; n <= 4; ++n) {
    auto ws = demo_cell();
    const char* slots[] = {"a", "b", "c", "d"};
    json and_props, or_props;
    for (int i = 0; i < n; ++i) {
      add(ws, "x" + std::to_string(i), "workstation-button", {{"button", "b" + std::to_string(i)}});
      and_props[slots[i]] = "x" + std::to_string(i);
    }
    if (n >= 2) {
      add(ws, "all", "and", and_props);
      add(ws, "any", "or", and_props);
    }
    add(ws, "neg", "not", {{"operand", "x0"}});
    for (int mask = 0; mask < (1 << n); ++mask) {
      auto w = at(500);
      std::vector<bool> in;
      for (int i = 0; i < n; ++i) {
        const bool on = ((mask >> i) & 1) != 0;
        in.push_back(on);
        if (on) w.events.push_back(event(InputType::button, "b" + std::to_string(i), 450));
      }
      const auto r = evaluate_all(ws, w, nullptr);
      const bool oracle_and = std::all_of(in.begin(), in.end(), [](bool b) { return b; });
      const bool oracle_or = std::any_of(in.begin(), in.end(), [](bool b) { return b; });
      if (n >= 2) {
        EXPECT_EQ(r.is_active("all"), oracle_and) << "n=" << n << " mask=" << mask;
        EXPECT_EQ(r.is_active("any"), oracle_or) << "n=" << n << " mask=" << mask;
      }
      EXPECT_EQ(r.is_active("neg"), !in[0]);
    }
  }
}

TEST(Conditions, EdgeExactlyOnceOverRandomTraces) {
  auto ws = demo_cell();
  add(ws, "press", "workstation-button", {{"button", "k"}});
  add(ws, "on-rise", "acknowledge", {{"trigger", "press"}, {"edge", "rising"}});
  add(ws, "on-fall", "acknowledge", {{"trigger", "press"}, {"edge", "falling"}});
  add(ws, "while", "acknowledge", {{"trigger", "press"}, {"edge", "while-active"}});
  std::mt19937_64 rng(2024);
  for (int trace = 0; trace < 200; ++trace) {
    std::vector<std::int64_t> presses;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) presses.push_back(static_cast<std::int64_t>(rng() % 3000));
    int rises = 0, falls = 0, actives = 0, fired_rise = 0, fired_fall = 0, fired_while = 0;
    bool prev = false;
    EvaluationReport last;
    for (std::int64_t t = 0; t <= 3500; t += 50) {
      auto w = at(t);
      for (auto p : presses) {
        if (p <= t) w.events.push_back(event(InputType::button, "k", p));
      }
      const bool oracle = std::any_of(presses.begin(), presses.end(), [&](auto p) { return p <= t && t - p <= 200; });
      rises += oracle && !prev;
      falls += !oracle && prev;
      actives += oracle;
      prev = oracle;
      last = evaluate_all(ws, w, t == 0 ? nullptr : &last);
      for (const auto& f : last.fired) {
        fired_rise += f.action == "on-rise";
        fired_fall += f.action == "on-fall";
        fired_while += f.action == "while";
      }
    }
    EXPECT_EQ(fired_rise, rises);
    EXPECT_EQ(fired_fall, falls);
    EXPECT_EQ(fired_while, actives);
  }
}

TEST(Conditions, ProximityBoundaryIsStrict) {
  EXPECT_FALSE(proximity_active(3.0, 3.0, true));
  EXPECT_FALSE(proximity_active(3.0, 3.0, false));
  EXPECT_TRUE(proximity_active(3.0 + 1e-9, 3.0, true));
  EXPECT_FALSE(proximity_active(3.0 - 1e-9, 3.0, true));
  EXPECT_TRUE(proximity_active(3.0 - 1e-9, 3.0, false));
  EXPECT_FALSE(proximity_active(3.0 + 1e-9, 3.0, false));
}

TEST(Conditions, InsideZoneConvexHull) {
  std::vector<Vec3> square = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.5, 0.5, 0}};
  EXPECT_TRUE(inside_convex_hull_xy({0.5, 0.2, 3.0}, square));
  EXPECT_TRUE(inside_convex_hull_xy({1.0, 0.5, 0}, square));
  EXPECT_FALSE(inside_convex_hull_xy({1.0001, 0.5, 0}, square));
  EXPECT_FALSE(inside_convex_hull_xy({0.5, 0.5, 0}, {{0, 0, 0}, {1, 1, 0}}));

  auto ws = demo_cell();
  add(ws, "in", "inside-zone", {{"anchor", "user-hand-right"}, {"zone-id", "z1"}});
  auto w = at(0);
  w.zones["z1"] = {{1, 0, 0}, {3, 0, 0}, {3, 2, 0}, {1, 2, 0}};
  w.body[BodyPart::hand_right] = Pose::translation(2, 1, 1.2);
  EXPECT_TRUE(evaluate_all(ws, w, nullptr).is_active("in"));
  w.body[BodyPart::hand_right] = Pose::translation(0, 1, 1.2);
  EXPECT_FALSE(evaluate_all(ws, w, nullptr).is_active("in"));
}

TEST(Conditions, GazeRayAndPinch) {
  auto ws = Workstation::make("g", "");
  Tracker t{"t", "", Pose::identity(), "t-root"};
  ws.trackers["t"] = t;
  ws.anchors["t-root"] = {"t-root", "", {AnchorParent::Type::tracker_root, "t"}, Pose::identity()};
  add(ws, "ball", "indicator-3d", {{"anchor", "t-root"}, {"pose", pose_to_json(Pose::translation(0, 0, 1))}});
  add(ws, "look", "gaze", {{"target", "ball"}});
  add(ws, "grab", "gaze-pinch", {{"target", "ball"}});
  auto w = at(1000);
  w.body[BodyPart::head] = Pose::identity();
  auto r = evaluate_all(ws, w, nullptr);
  EXPECT_TRUE(r.is_active("look"));
  EXPECT_FALSE(r.is_active("grab"));
  w.events = {event(InputType::pinch, "", 950)};
  EXPECT_TRUE(evaluate_all(ws, w, nullptr).is_active("grab"));
  // Sphere radius 0.15: a 0.16 m miss is outside, looking away never hits.
  w.body[BodyPart::head] = Pose::translation(0.16, 0, 0);
  EXPECT_FALSE(evaluate_all(ws, w, nullptr).is_active("look"));
  w.body[BodyPart::head] = Pose(Vec3::Zero(), Quat(Eigen::AngleAxisd(M_PI, Vec3::UnitX())));
  EXPECT_FALSE(evaluate_all(ws, w, nullptr).is_active("look"));
  EXPECT_TRUE(gaze_hits(Pose::translation(0.14, 0, 0), {0, 0, 1}, 0.15));
  w.events = {event(InputType::gaze, "ball", 990)};
  EXPECT_TRUE(evaluate_all(ws, w, nullptr).is_active("look"));
}

TEST(Conditions, RobotTaskOperatorAndMessageKinds) {
  auto ws = demo_cell();
  add(ws, "playing", "robot-run-state", {{"agent", "ur5e"}, {"state", "playing"}});
  add(ws, "moving", "robot-moving", {{"agent", "ur5e"}});
  add(ws, "help", "robot-assistance", {{"agent", "ur5e"}});
  add(ws, "hot", "robot-sensor-threshold", {{"agent", "ur5e"}, {"sensor", "pressure"}, {"threshold", 10.0}});
  add(ws, "a-done", "task-status", {{"task", "t-a"}, {"status", "completed"}});
  add(ws, "b-op", "task-assigned-to", {{"task", "t-b"}, {"agent", "op1"}});
  add(ws, "skilled", "operator-skill", {{"agent", "op1"}, {"level", 3}});
  add(ws, "expert", "operator-skill", {{"agent", "op1"}, {"level", 4}});
  add(ws, "go", "speech-command", {{"command", "go"}});
  add(ws, "msg", "message-received", {{"topic", "custom/+/mode"}, {"field", "mode"}, {"value", "path"}});
  add(ws, "latched", "message-received",
      {{"topic", "custom/+/mode"}, {"field", "mode"}, {"value", "path"}, {"mode", "latched"}});
  auto w = at(5000);
  RobotState rs;
  rs.run_state = RunState::playing;
  rs.moving = true;
  rs.sensors["pressure"] = 12.5;
  w.robots["ur5e"] = rs;
  w.tasks["t-a"] = {TaskStatus::completed, "ur5e"};
  w.events = {event(InputType::speech, "go", 4900)};
  MessageEvent m{"custom/ws/mode", {{"mode", "path"}}, 1000};
  w.messages = {m};
  w.latest_messages[m.topic] = m;
  auto r = evaluate_all(ws, w, nullptr);
  for (const char* id : {"playing", "moving", "hot", "a-done", "b-op", "skilled", "go", "latched"}) {
    EXPECT_TRUE(r.is_active(id)) << id;
  }
  for (const char* id : {"help", "expert", "msg"}) EXPECT_FALSE(r.is_active(id)) << id;
  w.now_ms = 1100;
  w.events.clear();
  EXPECT_TRUE(evaluate_all(ws, w, nullptr).is_active("msg"));
  m = {"custom/ws/mode", {{"mode", "silhouette"}}, 1100};
  w.latest_messages[m.topic] = m;
  EXPECT_FALSE(evaluate_all(ws, w, nullptr).is_active("latched"));
}

TEST(Conditions, CycleIsReportedWithItsMembers) {
  auto ws = demo_cell();
  add(ws, "p", "workstation-button", {{"button", "x"}});
  add(ws, "c1", "and", {{"a", "p"}, {"b", "c2"}});
  add(ws, "c2", "or", {{"a", "c1"}, {"b", "p"}});
  try {
    (void)evaluate_all(ws, at(0), nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cycle);
    EXPECT_NE(std::string(e.what()).find("c1 -> c2 -> c1"), std::string::npos) << e.what();
  }
}

TEST(Conditions, DanglingReferenceIsInactiveAndInvalid) {
  auto ws = demo_cell();
  add(ws, "p", "workstation-button", {{"button", "x"}});
  add(ws, "both", "and", {{"a", "p"}, {"b", "gone"}});
  auto w = at(100);
  w.events = {event(InputType::button, "x", 100)};
  const auto r = evaluate_all(ws, w, nullptr);
  EXPECT_TRUE(r.is_active("p"));
  EXPECT_FALSE(r.is_active("both"));
  ASSERT_EQ(r.invalid.count("both"), 1u);
  EXPECT_NE(r.invalid.at("both").find("gone"), std::string::npos);
}

TEST(Conditions, VisibilityFailsClosed) {
  auto ws = demo_cell();
  add(ws, "playing", "robot-run-state", {{"agent", "ur5e"}, {"state", "playing"}});
  add(ws, "zone", "zone", {{"zone-id", "z1"}});
  ws.components["zone"].visibility = "playing";
  add(ws, "panel", "message", {{"text", "hi"}});
  add(ws, "ghostly", "message", {{"text", "x"}});
  ws.components["ghostly"].visibility = "nope";
  auto w = at(0);
  w.robots["ur5e"].run_state = RunState::paused;
  auto r = evaluate_all(ws, w, nullptr);
  EXPECT_FALSE(visibility("zone", ws, r));
  EXPECT_TRUE(visibility("panel", ws, r));
  std::string why;
  EXPECT_FALSE(visibility("ghostly", ws, r, &why));
  EXPECT_NE(why.find("nope"), std::string::npos);
  w.robots["ur5e"].run_state = RunState::playing;
  r = evaluate_all(ws, w, nullptr);
  EXPECT_TRUE(visibility("zone", ws, r));
  ws.components["zone"].enabled = false;
  EXPECT_FALSE(visibility("zone", ws, r));
}

TEST(Conditions, DeterministicReports) {
  auto ws = demo_cell();
  add(ws, "p", "workstation-button", {{"button", "x"}});
  add(ws, "n", "not", {{"operand", "p"}});
  add(ws, "ack", "acknowledge", {{"trigger", "n"}});
  auto w = at(10);
  const auto a = evaluate_all(ws, w, nullptr);
  const auto b = evaluate_all(ws, w, nullptr);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_EQ(a.fired.size(), 1u);
}

TEST(ConditionServiceTest, PokeOverBusFiresActionOnce) {
  bus::InProcessBroker broker;
  authoring::AuthoringService auth(broker.connect("authoring"), authoring::Authoring(demo_cell()));
  auth.start(0);
  auth.handle("create", {{"kind", "indicator-3d"}, {"id", "red"}, {"properties", {{"color", "#FF0000"}}}});
  auth.handle("create", {{"kind", "robot-play-pause"}, {"id", "pp"}, {"properties", {{"agent", "ur5e"}, {"trigger", "red-poke"}}}});
  ConditionService engine(broker.connect("engine"), "ws1");
  engine.start(0);
  auto client = broker.connect("scene");
  std::vector<json> actions;
  client->subscribe(bus::topics::action_events("ws1"), [&](const bus::Envelope& e) { actions.push_back(e.payload); });
  for (std::int64_t t = 0; t <= 1000; t += 10) {
    if (t == 300) client->publish(bus::topics::input_events("ws1"), to_json(InputEvent{InputType::poke, "red", "", 300, false}));
    engine.tick(t);
    client->poll();
  }
  ASSERT_EQ(actions.size(), 1u);
  EXPECT_EQ(actions[0].at("action"), "pp");
  EXPECT_EQ(actions[0].at("timestamp_ms"), 300);
  const auto state = broker.retained(bus::topics::condition_report("ws1"));
  ASSERT_EQ(state.size(), 1u);
  EXPECT_FALSE(state[0].payload.at("active").at("red-poke").get<bool>());
}

}  // namespace
