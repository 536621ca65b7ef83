#include <gtest/gtest.h>

#include <random>

#include "arthur/bus/inprocess.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/anchors.hpp"
#include "arthur/core/error.hpp"
#include "arthur/runtime/runtime.hpp"
#include "arthur/scene/projection.hpp"
#include "../support/fixtures.hpp"
#include "../support/mutations.hpp"
#include "../support/oracles.hpp"

using namespace arthur;
namespace ot = arthur::testing;

namespace {

class SceneTest : public ::testing::Test {
 protected:
  bus::InProcessBroker broker;

  std::unique_ptr<runtime::Runtime> make(Workstation ws, int clients = 2) {
    runtime::Options o;
    o.scene_clients = clients;
    auto rt = std::make_unique<runtime::Runtime>(std::move(ws), [this](const std::string& id) { return broker.connect(id); }, o);
    rt->start();
    return rt;
  }

  static json call(runtime::Runtime& rt, const std::string& op, json args, std::size_t client = 0) {
    const auto id = rt.client(client).request(op, std::move(args));
    rt.run_for(10);
    auto r = rt.client(client).response(id);
    EXPECT_TRUE(r.has_value());
    return r ? *r : json();
  }
};

TEST_F(SceneTest, EmptyWorkstationDumpsNothing) {
  auto ws = Workstation::make("ws1", "empty");
  auto rt = make(ws, 1);
  rt->run_for(100);
  EXPECT_EQ(rt->client().dump_scene(), "");
  ASSERT_TRUE(rt->client().workstation().has_value());
}

TEST_F(SceneTest, NodesFollowCreateUpdateDelete) {
  auto rt = make(ot::demo_cell());
  auto r = call(*rt, "create", {{"kind", "robot-path"}, {"id", "path"}, {"properties", {{"agent", "ur5e"}}}});
  ASSERT_TRUE(r.at("ok").get<bool>()) << r.dump();
  call(*rt, "create", {{"kind", "message"}, {"id", "note"}, {"properties", {{"anchor", "shelf"}, {"text", "hello"}}}});
  for (std::size_t c = 0; c < 2; ++c) {
    ASSERT_NE(rt->client(c).node("path"), nullptr);
    EXPECT_DOUBLE_EQ(rt->client(c).node("path")->properties.at("width").get<double>(), 0.01);
  }
  call(*rt, "update_property", {{"id", "path"}, {"name", "width"}, {"value", 0.05}}, 1);
  EXPECT_DOUBLE_EQ(rt->client(0).node("path")->properties.at("width").get<double>(), 0.05);
  call(*rt, "delete", {{"id", "path"}});
  EXPECT_EQ(rt->client(1).node("path"), nullptr);
  EXPECT_EQ(rt->client(0).dump_scene(), rt->client(1).dump_scene());
  EXPECT_NE(rt->client(0).dump_scene().find("note message visible=1"), std::string::npos);
}

TEST_F(SceneTest, InjectFlagsUnknownTargets) {
  auto rt = make(ot::demo_cell(), 1);
  call(*rt, "create", {{"kind", "indicator-3d"}, {"id", "red"}, {"properties", {{"color", "#FF0000"}}}});
  std::vector<json> seen;
  rt->control().subscribe(bus::topics::input_events("ws1"), [&](const bus::Envelope& e) { seen.push_back(e.payload); });
  rt->client().inject({InputType::poke, "red", "user-hand-right", 0, false});
  rt->client().inject({InputType::poke, "ghost", "", 0, false});
  rt->client().inject({InputType::button, "physical-1", "", 0, false});
  rt->run_for(10);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_FALSE(seen[0].at("unresolved").get<bool>());
  EXPECT_TRUE(seen[1].at("unresolved").get<bool>());
  EXPECT_FALSE(seen[2].at("unresolved").get<bool>());
  EXPECT_EQ(seen[0].at("timestamp_ms"), rt->now() - 10);
}

TEST_F(SceneTest, SetPositionRoutesThroughAuthoring) {
  auto rt = make(ot::demo_cell());
  call(*rt, "create", {{"kind", "robot-path"}, {"id", "path"}, {"properties", {{"agent", "ur5e"}}}});
  call(*rt, "create", {{"kind", "message"}, {"id", "panel"}, {"properties", {{"anchor", "shelf"}}}});
  EXPECT_THROW(rt->client().set_position("path", Pose::translation(1, 0, 0)), Error);
  // Outside refinement the service refuses.
  auto id = rt->client().set_position("panel", Pose::translation(0.1, 0.2, 0.3));
  rt->run_for(10);
  EXPECT_EQ(rt->client().response(id)->at("error").at("code"), "phase");
  call(*rt, "set_phase", {{"phase", "refinement"}});
  id = rt->client().set_position("panel", Pose::translation(0.1, 0.2, 0.3));
  rt->run_for(10);
  ASSERT_TRUE(rt->client().response(id)->at("ok").get<bool>());
  const auto before = *rt->client(1).node("panel")->pose;

  // Moving the fixture anchor drags the shelf and the panel on it rigidly.
  const Pose fixture_new(Vec3(0.5, -0.2, 0.05), Quat(Eigen::AngleAxisd(0.4, Vec3::UnitZ())));
  id = rt->client(1).set_position("fixture", fixture_new);
  rt->run_for(10);
  ASSERT_TRUE(rt->client(1).response(id)->at("ok").get<bool>());
  const auto after = *rt->client(0).node("panel")->pose;
  const auto& ws = *rt->client(0).workstation();
  const auto tracker = ws.trackers.at("t1").world_pose;
  const auto oracle = ot::mul(ot::mul(ot::mul(ot::homogeneous(tracker), ot::homogeneous(fixture_new)),
                                      ot::homogeneous(ws.anchors.at("shelf").local_pose)),
                              ot::homogeneous(Pose::translation(0.1, 0.2, 0.3)));
  const auto [dt, dr] = ot::errors(after, oracle);
  EXPECT_LT(dt, 1e-9);
  EXPECT_LT(dr, 1e-9);
  EXPECT_GT((after.position() - before.position()).norm(), 1e-3);
  EXPECT_EQ(rt->client(0).dump_scene(), rt->client(1).dump_scene());
}

TEST_F(SceneTest, ZoneHiddenWhileRobotNotPlaying) {
  auto rt = make(ot::demo_cell(), 1);
  call(*rt, "create", {{"kind", "robot-run-state"}, {"id", "robot-playing"}, {"properties", {{"agent", "ur5e"}, {"state", "playing"}}}});
  call(*rt, "create", {{"kind", "zone"}, {"id", "safety"}, {"visibility", "robot-playing"}, {"properties", {{"zone-id", "z1"}}}});
  rt->control().publish(bus::topics::zone("ws1", "z1"), {{"zone_id", "z1"}, {"points", {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}}}, true);
  rt->run_for(200);
  const auto* zone = rt->client().node("safety");
  ASSERT_NE(zone, nullptr);
  EXPECT_FALSE(zone->visible);
  EXPECT_EQ(zone->points.size(), 3u);
  EXPECT_NE(rt->client().dump_scene().find("safety zone visible=0"), std::string::npos);
  rt->robot("ur5e").handle("play_pause", json::object());
  rt->run_for(200);
  EXPECT_TRUE(rt->client().node("safety")->visible);
}

TEST_F(SceneTest, UnresolvedAnchorHidesNode) {
  auto rt = make(ot::demo_cell(), 1);
  call(*rt, "create", {{"kind", "message"}, {"id", "hud"}, {"properties", {{"anchor", "user-head"}}}});
  rt->run_for(100);
  const auto* n = rt->client().node("hud");
  ASSERT_NE(n, nullptr);
  EXPECT_FALSE(n->visible);
  EXPECT_NE(n->note.find("user-head"), std::string::npos);
  rt->client().publish_body({{BodyPart::head, Pose::translation(1, 1, 1.7)}});
  rt->run_for(100);
  EXPECT_TRUE(rt->client().node("hud")->visible);
  EXPECT_NEAR(rt->client().node("hud")->pose->position().z(), 1.7, 1e-12);
}

TEST_F(SceneTest, QueryEndpoint) {
  auto rt = make(ot::demo_cell(), 1);
  call(*rt, "create", {{"kind", "message"}, {"id", "m"}, {"properties", {{"text", "x"}}}});
  bus::RpcClient rpc(rt->control(), bus::topics::rpc_request("ws1", "scene-hmd1"), bus::topics::rpc_response("ws1", "scene-hmd1"));
  const auto dump = rpc.call("dump", json::object());
  const auto node = rpc.call("node", {{"id", "m"}});
  rt->run_for(10);
  EXPECT_EQ(rpc.response(dump)->at("result"), rt->client().dump_scene());
  EXPECT_EQ(rpc.response(node)->at("result").at("kind"), "message");
}

TEST_F(SceneTest, ClientsConvergeAfterRandomMutations) {
  auto rt = make(ot::demo_cell(), 3);
  std::mt19937_64 rng(99);
  int applied = 0;
  for (int i = 0; i < 2000 && applied < 200; ++i) {
    const auto m = ot::random_mutation(rt->authoring().model().workstation(), rng);
    const auto r = call(*rt, m["op"], m["args"], static_cast<std::size_t>(i % 3));
    applied += r.value("ok", false) ? 1 : 0;
  }
  ASSERT_EQ(applied, 200);
  rt->run_for(200);
  const auto dump = rt->client(0).dump_scene();
  EXPECT_EQ(dump, rt->client(1).dump_scene());
  EXPECT_EQ(dump, rt->client(2).dump_scene());
  const auto snapshot = workstation_from_json(rt->authoring().handle("snapshot", json::object()));
  const auto expected = scene::dump_scene(scene::project(
      {snapshot, rt->client(0).world(), rt->client(0).report(), {}, rt->models()}));
  EXPECT_EQ(dump, expected);
}

}  // namespace
