#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "arthur/core/pose.hpp"

namespace arthur {

using json = nlohmann::json;

enum class Category { feedback, action, condition };

enum class AgentRole { human_operator, robot };

struct Agent {
  std::string id;
  std::string name;
  AgentRole role = AgentRole::human_operator;
  int skill_level = 0;     // operators only
  std::string robot_type;  // robots only, e.g. "UR5e"
  std::string tool;
  std::string mount_anchor;  // robots: anchor the base is mounted relative to
  Pose mount_pose;
};

struct AnchorParent {
  enum class Type { tracker_root, anchor, user_head, user_hand_left, user_hand_right };
  Type type = Type::anchor;
  std::string ref;  // tracker id for tracker_root, anchor id for anchor, empty otherwise
};

struct Anchor {
  std::string id;
  std::string label;
  AnchorParent parent;
  Pose local_pose;
};

struct Tracker {
  std::string id;
  std::string label;
  Pose world_pose;
  std::string root_anchor_id;
};

/// Bill-of-materials entry (part or tool).
struct Item {
  std::string id;
  std::string name;
  std::string anchor;  // optional
};

using JointVector = std::array<double, 6>;

/// One Bill-of-Process step.
struct Task {
  std::string id;
  std::string name;
  std::string description;
  std::vector<std::string> predecessors;
  std::string agent;  // initial assignment
  std::string step_anchor;
  Pose step_pose;
  std::vector<std::string> parts;
  std::vector<std::string> tools;
  std::string image;
  std::vector<JointVector> program;  // joint-space waypoints for robot execution
  std::map<std::string, std::vector<double>> sensor_profile;
};

struct ComponentDescriptor {
  std::string id;
  std::string kind;
  json properties = json::object();
  bool implicit = false;
  std::string owner;                      // implicit conditions: creating feedback id
  std::optional<std::string> visibility;  // feedback: gating condition id
  bool enabled = true;                    // feedback: flipped by toggle-feedback
};

enum class Phase { configuration, refinement, operation };

/// Reserved anchor ids that every workstation carries.
inline constexpr std::string_view kUserHead = "user-head";
inline constexpr std::string_view kUserHandLeft = "user-hand-left";
inline constexpr std::string_view kUserHandRight = "user-hand-right";

struct Workstation {
  std::string id;
  std::string name;
  Phase phase = Phase::configuration;
  std::uint64_t revision = 0;
  std::uint64_t next_serial = 1;
  std::map<std::string, Agent> agents;
  std::map<std::string, Tracker> trackers;
  std::map<std::string, Anchor> anchors;
  std::map<std::string, ComponentDescriptor> components;
  std::map<std::string, Item> tools;
  std::map<std::string, Item> parts;
  std::vector<Task> tasks;  // BoP order

  /// Empty workstation with the default user body anchors.
  static Workstation make(std::string id, std::string name);

  [[nodiscard]] const ComponentDescriptor* component(std::string_view cid) const;
  [[nodiscard]] const Task* task(std::string_view tid) const;
  [[nodiscard]] const Agent* agent(std::string_view aid) const;
  /// Components whose spec belongs to `category`, ordered by id.
  [[nodiscard]] std::vector<const ComponentDescriptor*> components_of(Category category) const;
};

// --- world state ------------------------------------------------------------

enum class RunState { playing, paused, stopped };
enum class TaskStatus { pending, ready, active, completed };
enum class InputType { poke, gaze, pinch, button, speech, message };
enum class BodyPart { head, hand_left, hand_right };

struct RobotState {
  std::int64_t timestamp_ms = 0;
  JointVector q{};
  Pose tcp;  // robot base frame
  RunState run_state = RunState::stopped;
  bool moving = false;
  bool move_mode = false;
  bool assistance = false;
  bool waiting_for_ack = false;
  std::string task;
  double progress = 0.0;
  std::int64_t task_sample = -1;  // index of this sample within the current task
  std::map<std::string, double> sensors;
};

struct InputEvent {
  InputType type = InputType::poke;
  std::string target;  // feedback id, button id, or speech token
  std::string source;  // anchor id of the emitting body part, may be empty
  std::int64_t timestamp_ms = 0;
  bool unresolved = false;
};

struct TaskInfo {
  TaskStatus status = TaskStatus::pending;
  std::string agent;
};

struct MessageEvent {
  std::string topic;
  json payload;
  std::int64_t timestamp_ms = 0;
};

struct WorldState {
  std::int64_t now_ms = 0;
  std::map<std::string, RobotState> robots;
  std::map<BodyPart, Pose> body;
  std::map<std::string, TaskInfo> tasks;
  std::vector<InputEvent> events;
  std::map<std::string, std::vector<Vec3>> zones;
  std::vector<MessageEvent> messages;
  std::map<std::string, MessageEvent> latest_messages;
};

// --- string conversions -----------------------------------------------------

std::string_view to_string(Category c);
std::string_view to_string(AgentRole r);
std::string_view to_string(AnchorParent::Type t);
std::string_view to_string(Phase p);
std::string_view to_string(RunState s);
std::string_view to_string(TaskStatus s);
std::string_view to_string(InputType t);
std::string_view to_string(BodyPart b);

std::optional<Category> category_from_string(std::string_view s);
std::optional<Phase> phase_from_string(std::string_view s);
std::optional<RunState> run_state_from_string(std::string_view s);
std::optional<TaskStatus> task_status_from_string(std::string_view s);
std::optional<InputType> input_type_from_string(std::string_view s);
std::optional<BodyPart> body_part_from_string(std::string_view s);

}  // namespace arthur
