#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arthur/conditions/engine.hpp"
#include "arthur/core/model.hpp"
#include "arthur/robot/kinematics.hpp"

namespace arthur::scene {

struct SceneNode {
  std::string id;
  std::string kind;
  bool visible = false;
  std::optional<Pose> pose;           // world placement, for kinds placed in space
  std::vector<Vec3> points;           // path polyline, waypoint markers or zone polygon (world)
  json data = json::object();         // live payload: robot state text, sensor value, task info ...
  json properties = json::object();   // descriptor properties merged with schema defaults
  std::string note;                   // why the node is hidden or incomplete
};

/// Recorded TCP poses (robot base frame) keyed by (agent, task).
using PreviewMap = std::map<std::pair<std::string, std::string>, std::vector<Pose>>;
/// Robot models keyed by the agent's robot_type.
using ModelMap = std::map<std::string, robot::RobotModel>;

struct ProjectionInput {
  const Workstation& ws;
  const WorldState& world;
  const conditions::EvaluationReport& report;
  const PreviewMap& previews;
  const ModelMap& models;
};

/// One node per feedback component, ordered by id. Pure.
std::vector<SceneNode> project(const ProjectionInput& in);

/**
 * Line-oriented dump, one node per line in id order:
 *   <id> <kind> visible=<0|1> pose=<[x,y,z,qw,qx,qy,qz]|-> points=<[[x,y,z]..]> data=<json> props=<json>[ note=<text>]
 * Numbers are rounded to 1e-6 and quaternions printed with qw >= 0 so that
 * equal scenes print equal bytes. Empty scene, empty string.
 */
std::string dump_scene(const std::vector<SceneNode>& nodes);

json to_json(const SceneNode& n);

/// Report rebuilt from the retained conditions/state payload.
conditions::EvaluationReport report_from_state(const json& state);

}  // namespace arthur::scene
