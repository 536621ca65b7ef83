#pragma once

#include <optional>
#include <string_view>

#include "arthur/core/model.hpp"

namespace arthur {

/**
 * World pose of an anchor: the composition of local poses along its parent
 * chain, starting at a tracker's asserted world pose or a tracked body part.
 *
 * Throws Error(unresolved_anchor) for a missing anchor, a dangling parent, or
 * a body part whose pose is absent from `world`; Error(anchor_cycle) when the
 * chain loops.
 */
Pose resolve_anchor(std::string_view anchor_id, const Workstation& ws, const WorldState& world);

/// Parent chain from `anchor_id` up to (and including) its root anchor.
std::vector<std::string> anchor_chain(std::string_view anchor_id, const Workstation& ws);

/// Robot base in world: mount anchor composed with the agent's mount pose.
Pose robot_base_pose(const Agent& robot, const Workstation& ws, const WorldState& world);

/// Task the agent is working on: its active task, else its first unfinished one.
const Task* current_task_for(std::string_view agent_id, const Workstation& ws, const WorldState& world);

/// World placement of a feedback component, if the kind is placed in space.
/// Throws like resolve_anchor when the placement anchor cannot be resolved.
std::optional<Pose> feedback_world_pose(const ComponentDescriptor& desc, const Workstation& ws,
                                        const WorldState& world);

}  // namespace arthur
