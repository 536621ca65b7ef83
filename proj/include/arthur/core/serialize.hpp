#pragma once

#include <filesystem>
#include <string>

#include "arthur/core/model.hpp"

namespace arthur {

/// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string canonical(const json& j);

json to_json(const Agent& a);
json to_json(const Anchor& a);
json to_json(const Tracker& t);
json to_json(const Item& i);
json to_json(const Task& t);
json to_json(const ComponentDescriptor& d);
json to_json(const Workstation& ws);
json to_json(const RobotState& s);
json to_json(const InputEvent& e);

// Readers throw Error(load) whose message starts with the JSON pointer of the
// offending value, e.g. "/components/feedback/2/kind: unknown component kind 'x'".
Agent agent_from_json(const json& j, const std::string& path = "");
Anchor anchor_from_json(const json& j, const std::string& path = "");
Tracker tracker_from_json(const json& j, const std::string& path = "");
Item item_from_json(const json& j, const std::string& path = "");
Task task_from_json(const json& j, const std::string& path = "");
ComponentDescriptor descriptor_from_json(const json& j, const std::string& path = "");
Workstation workstation_from_json(const json& j);
RobotState robot_state_from_json(const json& j, const std::string& path = "");
InputEvent input_event_from_json(const json& j, const std::string& path = "");

Workstation load_workstation(const std::filesystem::path& file);
void save_workstation(const std::filesystem::path& file, const Workstation& ws);

/// Writes `text` to `file` through a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& file, const std::string& text);
std::string read_file(const std::filesystem::path& file);

}  // namespace arthur
