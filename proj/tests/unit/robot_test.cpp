#include <gtest/gtest.h>

#include <random>
#include <set>

#include "arthur/assembly/service.hpp"
#include "arthur/bus/inprocess.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"
#include "arthur/robot/adapter.hpp"
#include "arthur/robot/kinematics.hpp"
#include "arthur/robot/sim.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

using namespace arthur;
using namespace arthur::robot;
namespace ot = arthur::testing;

namespace {

RobotModel ur5e() { return load_robot_model(std::string(ARTHUR_DATA_DIR) + "/robots/ur5e.dh"); }

// The shipped table, typed in again so the oracle does not read the same file.
constexpr double kD[6] = {0.1625, 0, 0, 0.1333, 0.0997, 0.0996};
constexpr double kA[6] = {0, -0.425, -0.3922, 0, 0, 0};
constexpr double kAlpha[6] = {M_PI / 2, 0, 0, M_PI / 2, -M_PI / 2, 0};

ot::Mat4 dh_oracle(const JointVector& q) {
  auto m = ot::identity4();
  for (int i = 0; i < 6; ++i) m = ot::mul(m, ot::dh_link(q[i], kD[i], kA[i], kAlpha[i]));
  return m;
}

Task program_task(const std::string& id, std::vector<JointVector> program, std::vector<double> pressure = {}) {
  Task t;
  t.id = id;
  t.program = std::move(program);
  if (!pressure.empty()) t.sensor_profile["pressure"] = std::move(pressure);
  return t;
}

TEST(Kinematics, ModelFileParses) {
  const auto m = ur5e();
  EXPECT_EQ(m.name, "UR5e");
  EXPECT_DOUBLE_EQ(m.joints[0].d, 0.1625);
  EXPECT_DOUBLE_EQ(m.joints[2].a, -0.3922);
  EXPECT_THROW(parse_robot_model("model X\njoint 1 2 3\n"), Error);
  try {
    parse_robot_model("model X\nbogus\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Kinematics, ZeroPoseMatchesDhOracle) {
  const auto p = fk(ur5e(), {});
  const auto [dt, dr] = ot::errors(p, dh_oracle({}));
  EXPECT_LT(dt, 1e-9);
  EXPECT_LT(dr, 1e-9);
  // Flange of a UR5e at zero: (a2 + a3, -(d4 + d6), d1 - d5).
  EXPECT_NEAR(p.position().x(), -0.8172, 1e-12);
  EXPECT_NEAR(p.position().y(), -0.2329, 1e-12);
  EXPECT_NEAR(p.position().z(), 0.0628, 1e-12);
}

TEST(Kinematics, RandomConfigurationsMatchDhOracle) {
  const auto m = ur5e();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int i = 0; i < 1000; ++i) {
    JointVector q;
    for (auto& v : q) v = angle(rng);
    const auto [dt, dr] = ot::errors(fk(m, q), dh_oracle(q));
    ASSERT_LT(dt, 1e-9);
    ASSERT_LT(dr, 1e-9);
  }
}

TEST(Kinematics, BaseJointRotatesAboutZ) {
  const auto m = ur5e();
  JointVector q = {0, -1.0, 0.7, 0.2, 0.3, 0.1};
  const auto p0 = fk(m, q).position();
  q[0] = 0.9;
  const auto p1 = fk(m, q).position();
  const Vec3 expected = Eigen::AngleAxisd(0.9, Vec3::UnitZ()) * p0;
  EXPECT_LT((p1 - expected).norm(), 1e-12);
  EXPECT_EQ(fk(m, q), fk(m, q));
  q[3] = std::nan("");
  EXPECT_THROW(fk(m, q), Error);
}

TEST(Sim, ModeMachineOverRandomCommands) {
  RobotSim sim(ur5e());
  const std::set<std::pair<Mode, Mode>> allowed = {
      {Mode::stopped, Mode::playing}, {Mode::playing, Mode::stopped}, {Mode::playing, Mode::paused},
      {Mode::paused, Mode::playing},  {Mode::playing, Mode::move_mode}, {Mode::paused, Mode::move_mode},
      {Mode::move_mode, Mode::paused}};
  std::mt19937_64 rng(11);
  for (int i = 0; i < 5000; ++i) {
    const auto before = sim.mode();
    switch (rng() % 4) {
      case 0: sim.play_pause(); break;
      case 1: sim.toggle_move_mode(); break;
      case 2: sim.stop(); break;
      default: sim.acknowledge();
    }
    if (sim.mode() != before) EXPECT_EQ(allowed.count({before, sim.mode()}), 1u);
  }
  RobotSim twice(ur5e());
  twice.play_pause();
  const auto mode = twice.mode();
  twice.play_pause();
  twice.play_pause();
  EXPECT_EQ(twice.mode(), mode);
}

TEST(Sim, AcknowledgeGate) {
  RobotSim sim(ur5e());
  EXPECT_FALSE(sim.acknowledge());  // stopped: nothing to release
  sim.play_pause();
  EXPECT_TRUE(sim.waiting_for_ack());
  EXPECT_FALSE(sim.ready_for_task());
  EXPECT_TRUE(sim.acknowledge());
  EXPECT_TRUE(sim.ready_for_task());
  EXPECT_FALSE(sim.acknowledge());
  sim.start_task(program_task("t", {{0.1, 0, 0, 0, 0, 0}}));
  EXPECT_FALSE(sim.waiting_for_ack());
}

TEST(Sim, MotionRespectsSpeedAndPauseDoesNotChangeTheEnd) {
  const auto m = ur5e();
  const std::vector<JointVector> program = {{1.0, -1.2, 0.8, 0.3, -0.5, 2.0}, {-0.4, -0.2, 1.5, -1.0, 0.5, -1.0}};
  auto run = [&](bool with_pause) {
    RobotSim sim(m, {25, false});
    sim.play_pause();
    sim.start_task(program_task("t", program));
    std::vector<RobotState> samples;
    std::int64_t t = 0;
    for (int i = 0; i < 200 && !sim.task().empty(); ++i) {
      if (with_pause && i == 7) {
        sim.play_pause();
        for (int k = 0; k < 5; ++k) {
          const auto s = sim.step(t += 40);
          EXPECT_FALSE(s.moving);
          EXPECT_EQ(s.q, samples.back().q);
          samples.push_back(s);
        }
        sim.play_pause();
      }
      samples.push_back(sim.step(t += 40));
    }
    return samples;
  };
  const auto plain = run(false);
  const auto paused = run(true);
  for (std::size_t i = 1; i < plain.size(); ++i) {
    for (int j = 0; j < 6; ++j) {
      ASSERT_LE(std::abs(plain[i].q[j] - plain[i - 1].q[j]), m.joints[j].max_speed / 25 + 1e-12);
    }
  }
  EXPECT_EQ(plain.back().q, program.back());
  EXPECT_EQ(paused.size(), plain.size() + 5);
  EXPECT_LT((plain.back().tcp.position() - paused.back().tcp.position()).norm(), 1e-9);
  for (const auto& s : paused) ASSERT_LT((s.tcp.position() - fk(m, s.q).position()).norm(), 1e-9);
}

TEST(Sim, SensorProfilePlaysSampleForSample) {
  RobotSim sim(ur5e(), {10, false});
  sim.play_pause();
  const std::vector<double> profile = {0, 2.5, 7.5, 12.0, 9.0, 3.0};
  sim.start_task(program_task("sand", {{0.1, 0, 0, 0, 0, 0}}, profile));
  std::vector<double> seen;
  for (int i = 0; i < 20; ++i) {
    const auto s = sim.step(i * 100);
    if (s.task_sample >= 0) seen.push_back(s.sensors.at("pressure"));
  }
  EXPECT_EQ(seen, profile);
  EXPECT_TRUE(sim.task().empty());
}

class AdapterTest : public ::testing::Test {
 protected:
  bus::InProcessBroker broker;
  std::unique_ptr<assembly::AssemblyService> assembly;
  std::unique_ptr<RobotAdapterService> robot;
  std::unique_ptr<bus::Connection> client = broker.connect("client");
  std::vector<RobotState> samples;

  void SetUp() override {
    auto ws = ot::demo_cell();
    ws.tasks[0].sensor_profile["pressure"] = {1, 2, 3};
    assembly = std::make_unique<assembly::AssemblyService>(broker.connect("assembly"), ws);
    robot = std::make_unique<RobotAdapterService>(broker.connect("robot"), "ws1", "ur5e", ur5e(), SimOptions{10, true});
    client->subscribe(bus::topics::robot_state("ws1", "ur5e"),
                      [this](const bus::Envelope& e) { samples.push_back(robot_state_from_json(e.payload)); });
  }

  void run_until(std::int64_t from, std::int64_t to, bool with_assembly = true) {
    for (auto t = from; t <= to; t += 10) {
      if (with_assembly) assembly->tick(t);
      robot->tick(t);
      client->poll();
    }
  }

  void act(const std::string& kind) {
    client->publish(bus::topics::action_events("ws1"), {{"kind", kind}, {"properties", {{"agent", "ur5e"}}}});
  }
};

TEST_F(AdapterTest, RunsTaskAfterPlayAndAcknowledge) {
  assembly->start(0);
  robot->start(0);
  run_until(0, 2000);
  EXPECT_EQ(assembly->graph().task("t-a").status, TaskStatus::ready);  // stopped robots do not poll
  act("robot-play-pause");
  run_until(2010, 3000);
  EXPECT_EQ(assembly->graph().task("t-a").status, TaskStatus::ready);  // gate still closed
  EXPECT_TRUE(robot->last_sample()->waiting_for_ack);
  act("robot-acknowledge");
  run_until(3010, 8000);
  EXPECT_EQ(assembly->graph().task("t-a").status, TaskStatus::completed);
  EXPECT_EQ(assembly->graph().task("t-b").status, TaskStatus::active);
  std::vector<double> pressure;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    ASSERT_LT((s.tcp.position() - fk(robot->sim().model(), s.q).position()).norm(), 1e-9);
    if (i > 0) ASSERT_GT(s.timestamp_ms, samples[i - 1].timestamp_ms);
    if (s.task == "t-a" && s.task_sample >= 0) pressure.push_back(s.sensors.at("pressure"));
  }
  // The motion outlasts the three-value profile, which then holds its last value.
  const std::vector<double> profile = {1, 2, 3};
  ASSERT_GT(pressure.size(), profile.size());
  for (std::size_t k = 0; k < pressure.size(); ++k) EXPECT_EQ(pressure[k], profile[std::min(k, profile.size() - 1)]);
}

TEST_F(AdapterTest, StreamRateAndPausedSamples) {
  assembly->start(0);
  robot->start(0);
  run_until(0, 1990);
  EXPECT_NEAR(static_cast<double>(samples.size()), 20.0, 1.0);
  for (const auto& s : samples) {
    EXPECT_FALSE(s.moving);
    EXPECT_EQ(s.q, samples.front().q);
  }
}

TEST_F(AdapterTest, PollWhilePausedIsSuppressed) {
  assembly->start(0);
  robot->start(0);
  const auto r = robot->handle("poll_next_task", json::object());
  EXPECT_FALSE(r.at("polled").get<bool>());
  EXPECT_FALSE(robot->handle("acknowledge", json::object()).at("released").get<bool>());
  EXPECT_EQ(robot->diagnostics_log().back(), "acknowledge with no pending gate");
}

TEST_F(AdapterTest, UnreachableAssemblyIsRetriedAndSurfaced) {
  robot->start(0);  // assembly never started
  robot->handle("play_pause", json::object());
  robot->handle("acknowledge", json::object());
  std::vector<json> status;
  client->subscribe(bus::topics::service_status("ws1", "robot-sim-ur5e"), [&](const bus::Envelope& e) { status.push_back(e.payload); });
  run_until(0, 4000, false);
  ASSERT_FALSE(status.empty());
  EXPECT_EQ(status.back().at("assembly"), "unreachable");
  EXPECT_GE(status.back().at("retries").get<int>(), 2);
  assembly->start(4000);
  run_until(4000, 20000);
  EXPECT_EQ(assembly->graph().task("t-a").status, TaskStatus::completed);
}

TEST_F(AdapterTest, RevokeDropsTheCurrentTask) {
  assembly->start(0);
  robot->start(0);
  act("robot-play-pause");
  act("robot-acknowledge");
  run_until(0, 150);
  ASSERT_EQ(robot->sim().task(), "t-a");
  assembly->handle("reassign_task", {{"task", "t-a"}, {"agent", "op1"}});
  run_until(160, 300);
  EXPECT_TRUE(robot->sim().task().empty());
}

}  // namespace
