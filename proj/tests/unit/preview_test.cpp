#include <gtest/gtest.h>

#include <filesystem>

#include "arthur/assembly/service.hpp"
#include "arthur/bus/inprocess.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/serialize.hpp"
#include "arthur/preview/recorder.hpp"
#include "arthur/preview/service.hpp"
#include "arthur/robot/adapter.hpp"
#include "../support/fixtures.hpp"

using namespace arthur;
using namespace arthur::preview;

namespace {

RobotState sample(std::int64_t t, const std::string& task, double q0) {
  RobotState s;
  s.timestamp_ms = t;
  s.task = task;
  s.q[0] = q0;
  return s;
}

TEST(RecorderTest, KeepsSamplesBetweenActivationAndCompletion) {
  Recorder rec;
  rec.on_robot_sample("r", sample(50, "t1", 0.0));
  rec.on_task_status("t1", TaskStatus::active, "r", 100);
  rec.on_robot_sample("r", sample(90, "t1", 0.1));   // older than activation
  rec.on_robot_sample("r", sample(100, "t1", 0.2));
  rec.on_robot_sample("r", sample(200, "t1", 0.3));
  rec.on_robot_sample("r", sample(200, "t1", 0.4));  // duplicate timestamp
  rec.on_robot_sample("x", sample(250, "t1", 0.5));  // other agent
  rec.on_robot_sample("r", sample(300, "t1", 0.6));
  rec.on_robot_sample("r", sample(500, "t1", 0.7));  // after completion time
  const auto r = rec.on_task_status("t1", TaskStatus::completed, "r", 450);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->revision, 1u);
  ASSERT_EQ(r->samples.size(), 3u);
  EXPECT_EQ(r->samples.front().timestamp_ms, 100);
  EXPECT_EQ(r->samples.back().timestamp_ms, 300);
  EXPECT_EQ(recording_from_json(to_json(*r)).samples.size(), 3u);
}

TEST(RecorderTest, ReexecutionReplacesRevision) {
  Recorder rec;
  for (int run = 1; run <= 2; ++run) {
    const std::int64_t base = run * 1000;
    rec.on_task_status("t1", TaskStatus::active, "r", base);
    rec.on_robot_sample("r", sample(base + 10, "t1", run));
    rec.on_robot_sample("r", sample(base + 20, "t1", run));
    rec.on_task_status("t1", TaskStatus::completed, "r", base + 30);
  }
  const auto* r = rec.get("r", "t1");
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->revision, 2u);
  EXPECT_EQ(r->samples.front().q[0], 2.0);
  EXPECT_EQ(rec.get("r", "t2"), nullptr);
}

TEST(RecorderTest, EmptyCompletions) {
  Recorder rec;
  rec.on_task_status("op-task", TaskStatus::active, "op1", 0);
  EXPECT_FALSE(rec.on_task_status("op-task", TaskStatus::completed, "op1", 100));
  EXPECT_TRUE(rec.diagnostics_log().empty());
  rec.on_robot_sample("r", sample(5, "", 0));
  rec.on_task_status("rt", TaskStatus::active, "r", 200);
  EXPECT_FALSE(rec.on_task_status("rt", TaskStatus::completed, "r", 300));
  ASSERT_EQ(rec.diagnostics_log().size(), 1u);
  EXPECT_NE(rec.diagnostics_log()[0].find("rt"), std::string::npos);
}

TEST(PreviewServiceTest, RecordsRobotTaskAndServesItVerbatim) {
  const auto dir = std::filesystem::temp_directory_path() / "arthur_preview_test";
  std::filesystem::remove_all(dir);
  bus::InProcessBroker broker;
  assembly::AssemblyService assembly(broker.connect("assembly"), arthur::testing::demo_cell());
  robot::RobotAdapterService robot(broker.connect("robot"), "ws1", "ur5e",
                                   robot::load_robot_model(std::string(ARTHUR_DATA_DIR) + "/robots/ur5e.dh"),
                                   {25, false});
  PreviewService preview(broker.connect("preview"), "ws1", dir);
  auto client = broker.connect("client");
  std::map<std::string, std::int64_t> active_at, completed_at;
  client->subscribe(bus::topics::task_status("ws1", "+"), [&](const bus::Envelope& e) {
    const auto status = e.payload.value("status", std::string());
    if (status == "active") active_at[e.topic] = e.payload.at("timestamp_ms");
    if (status == "completed") completed_at[e.topic] = e.payload.at("timestamp_ms");
  });
  assembly.start(0);
  robot.start(0);
  preview.start(0);
  robot.handle("play_pause", json::object());
  for (std::int64_t t = 0; t <= 5000; t += 10) {
    assembly.tick(t);
    robot.tick(t);
    preview.tick(t);
    client->poll();
  }
  ASSERT_EQ(assembly.graph().task("t-a").status, TaskStatus::completed);
  const auto* r = preview.recorder().get("ur5e", "t-a");
  ASSERT_NE(r, nullptr);
  EXPECT_GE(r->samples.size(), 2u);
  const auto topic = bus::topics::task_status("ws1", "t-a");
  EXPECT_GE(r->samples.front().timestamp_ms, active_at.at(topic));
  EXPECT_LE(r->samples.back().timestamp_ms, completed_at.at(topic));
  // Operator task t-b got active but never ran on a robot: nothing recorded.
  EXPECT_EQ(preview.recorder().get("op1", "t-b"), nullptr);

  bus::RpcClient rpc(*client, bus::topics::rpc_request("ws1", "preview"), bus::topics::rpc_response("ws1", "preview"));
  const auto id = rpc.call("get", {{"agent", "ur5e"}, {"task", "t-a"}});
  const auto missing = rpc.call("get", {{"agent", "ur5e"}, {"task", "nope"}});
  preview.tick(5010);
  client->poll();
  const auto fetched = rpc.response(id)->at("result");
  EXPECT_EQ(canonical(fetched), read_file(recording_path(dir, "ur5e", "t-a")));
  EXPECT_TRUE(rpc.response(missing)->at("result").is_null());

  bus::InProcessBroker other;
  PreviewService again(other.connect("preview"), "ws1", dir);
  again.start(0);
  EXPECT_EQ(again.handle("get", {{"agent", "ur5e"}, {"task", "t-a"}}), fetched);
  std::filesystem::remove_all(dir);
}

}  // namespace
