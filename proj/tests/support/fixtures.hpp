#pragma once

// Small workstations shared by the unit tests.

#include <cmath>

#include "arthur/core/model.hpp"

namespace arthur::testing {

/// One tracker on the table, a UR5e mounted on it, one operator, two parts and a linear BoP.
inline Workstation demo_cell() {
  auto ws = Workstation::make("ws1", "Demo cell");
  Tracker t;
  t.id = "t1";
  t.label = "table";
  t.world_pose = Pose(Vec3(2.0, 1.0, 0.8), Quat(Eigen::AngleAxisd(M_PI / 6, Vec3::UnitZ())));
  t.root_anchor_id = "t1-root";
  ws.trackers[t.id] = t;
  ws.anchors["t1-root"] = {"t1-root", "table origin", {AnchorParent::Type::tracker_root, "t1"}, Pose::identity()};
  ws.anchors["fixture"] = {"fixture", "fixture", {AnchorParent::Type::anchor, "t1-root"}, Pose::translation(0.4, 0.1, 0)};
  ws.anchors["shelf"] = {"shelf", "shelf", {AnchorParent::Type::anchor, "fixture"}, Pose::translation(0, 0.3, 0.2)};

  Agent robot;
  robot.id = "ur5e";
  robot.name = "UR5e";
  robot.role = AgentRole::robot;
  robot.robot_type = "UR5e";
  robot.tool = "gripper";
  robot.mount_anchor = "t1-root";
  robot.mount_pose = Pose(Vec3(-0.3, 0.0, 0.0), Quat(Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ())));
  ws.agents[robot.id] = robot;
  Agent op;
  op.id = "op1";
  op.name = "Operator";
  op.skill_level = 3;
  ws.agents[op.id] = op;

  ws.parts["p1"] = {"p1", "Mold half", ""};
  ws.parts["p2"] = {"p2", "Insert", "shelf"};
  ws.tools["screwdriver"] = {"screwdriver", "Screwdriver", ""};

  Task a;
  a.id = "t-a";
  a.name = "Place mold";
  a.description = "Robot places the mold half.";
  a.agent = "ur5e";
  a.parts = {"p1"};
  a.program = {JointVector{0, -1.57, 1.57, 0, 0, 0}, JointVector{0.5, -1.2, 1.3, 0, 0.2, 0}};
  Task b;
  b.id = "t-b";
  b.name = "Insert part";
  b.description = "Operator inserts the part.";
  b.agent = "op1";
  b.predecessors = {"t-a"};
  b.parts = {"p2"};
  b.tools = {"screwdriver"};
  b.step_anchor = "fixture";
  ws.tasks = {a, b};
  return ws;
}

}  // namespace arthur::testing
