#include "arthur/core/anchors.hpp"

#include <algorithm>
#include <set>

#include "arthur/core/error.hpp"
#include "arthur/core/registry.hpp"

namespace arthur {

namespace {

std::optional<BodyPart> body_part_of(AnchorParent::Type t) {
  switch (t) {
    case AnchorParent::Type::user_head: return BodyPart::head;
    case AnchorParent::Type::user_hand_left: return BodyPart::hand_left;
    case AnchorParent::Type::user_hand_right: return BodyPart::hand_right;
    default: return std::nullopt;
  }
}

}  // namespace

std::vector<std::string> anchor_chain(std::string_view anchor_id, const Workstation& ws) {
  std::vector<std::string> chain;
  std::set<std::string, std::less<>> seen;
  std::string current(anchor_id);
  while (true) {
    auto it = ws.anchors.find(current);
    if (it == ws.anchors.end()) {
      throw Error(ErrorCode::unresolved_anchor,
                  chain.empty() ? "unknown anchor '" + current + "'"
                                : "anchor '" + chain.back() + "' has dangling parent '" + current + "'");
    }
    if (!seen.insert(current).second) {
      std::string cycle;
      for (const auto& c : chain) cycle += c + " -> ";
      throw Error(ErrorCode::anchor_cycle, cycle + current);
    }
    chain.push_back(current);
    const Anchor& a = it->second;
    if (a.parent.type != AnchorParent::Type::anchor) return chain;
    current = a.parent.ref;
  }
}

Pose resolve_anchor(std::string_view anchor_id, const Workstation& ws, const WorldState& world) {
  const auto chain = anchor_chain(anchor_id, ws);
  const Anchor& root = ws.anchors.at(chain.back());
  Pose pose;
  if (root.parent.type == AnchorParent::Type::tracker_root) {
    auto tr = ws.trackers.find(root.parent.ref);
    if (tr == ws.trackers.end()) {
      throw Error(ErrorCode::unresolved_anchor,
                  "anchor '" + root.id + "' references unknown tracker '" + root.parent.ref + "'");
    }
    pose = tr->second.world_pose;
  } else if (auto part = body_part_of(root.parent.type)) {
    auto bp = world.body.find(*part);
    if (bp == world.body.end()) {
      throw Error(ErrorCode::unresolved_anchor,
                  "anchor '" + root.id + "' needs " + std::string(to_string(*part)) + " pose, which is not tracked");
    }
    pose = bp->second;
  }
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    pose = compose(pose, ws.anchors.at(*it).local_pose);
  }
  return pose;
}

Pose robot_base_pose(const Agent& robot, const Workstation& ws, const WorldState& world) {
  if (robot.mount_anchor.empty()) return robot.mount_pose;
  return compose(resolve_anchor(robot.mount_anchor, ws, world), robot.mount_pose);
}

const Task* current_task_for(std::string_view agent_id, const Workstation& ws, const WorldState& world) {
  auto assigned = [&](const Task& t) {
    auto it = world.tasks.find(t.id);
    return (it != world.tasks.end() && !it->second.agent.empty() ? it->second.agent : t.agent) == agent_id;
  };
  auto status = [&](const Task& t) {
    auto it = world.tasks.find(t.id);
    return it == world.tasks.end() ? TaskStatus::pending : it->second.status;
  };
  for (const auto& t : ws.tasks) {
    if (assigned(t) && status(t) == TaskStatus::active) return &t;
  }
  for (const auto& t : ws.tasks) {
    if (assigned(t) && status(t) != TaskStatus::completed) return &t;
  }
  return nullptr;
}

std::optional<Pose> feedback_world_pose(const ComponentDescriptor& desc, const Workstation& ws,
                                        const WorldState& world) {
  const auto& spec = builtin_registry().at(desc.kind);
  if (spec.positionable()) {
    Pose local = Pose::identity();
    if (auto it = desc.properties.find("pose"); it != desc.properties.end()) local = pose_from_json(*it);
    auto anchor = desc.properties.find("anchor");
    if (anchor == desc.properties.end() || !anchor->is_string() || anchor->get<std::string>().empty()) {
      return local;
    }
    return compose(resolve_anchor(anchor->get<std::string>(), ws, world), local);
  }
  if (desc.kind == "task-model-highlight" || desc.kind == "task-highlight") {
    const auto agent = desc.properties.value("agent", std::string());
    const Task* t = current_task_for(agent, ws, world);
    if (t == nullptr) return std::nullopt;
    if (t->step_anchor.empty()) return t->step_pose;
    return compose(resolve_anchor(t->step_anchor, ws, world), t->step_pose);
  }
  return std::nullopt;
}

}  // namespace arthur
