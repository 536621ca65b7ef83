#include "arthur/core/registry.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "arthur/core/error.hpp"

namespace arthur {

namespace {

constexpr std::array<std::string_view, kPropertyKindCount> kKindNames = {
    "boolean", "integer", "float",     "string", "anchor", "pose",
    "vector3", "condition", "color", "agent",  "enum",   "multi-select-enum"};

using K = PropertyKind;

PropertySchema prop(std::string name, K kind, bool required = false, json def = nullptr) {
  PropertySchema p;
  p.name = std::move(name);
  p.kind = kind;
  p.required = required;
  p.default_value = std::move(def);
  return p;
}

PropertySchema ranged(std::string name, K kind, double lo, double hi, json def, bool required = false) {
  auto p = prop(std::move(name), kind, required, std::move(def));
  p.min = lo;
  p.max = hi;
  return p;
}

PropertySchema choice(std::string name, std::vector<std::string> domain, json def, bool required = false) {
  auto p = prop(std::move(name), K::enumeration, required, std::move(def));
  p.domain = std::move(domain);
  return p;
}

PropertySchema ref(std::string name, Reference target, bool required = true) {
  auto p = prop(std::move(name), K::text, required);
  p.reference = target;
  return p;
}

PropertySchema agent(bool required = true) { return prop("agent", K::agent, required); }
PropertySchema color(std::string def) { return prop("color", K::color, false, std::move(def)); }
PropertySchema anchor() { return prop("anchor", K::anchor); }
PropertySchema pose() { return prop("pose", K::pose, false, pose_to_json(Pose::identity())); }
PropertySchema statuses() {
  auto p = prop("statuses", K::multi_enumeration, false, json::array({"pending", "ready", "active", "completed"}));
  p.domain = {"pending", "ready", "active", "completed"};
  return p;
}
PropertySchema window() { return ranged("window-ms", K::integer, 0, 60000, 200); }
PropertySchema trigger() { return prop("trigger", K::condition); }
PropertySchema edge() { return choice("edge", {"rising", "falling", "while-active"}, "rising"); }

ComponentSpec spec(std::string kind, Category cat, std::string group, std::string name, std::string icon,
                   std::string description, std::vector<PropertySchema> props) {
  ComponentSpec s;
  s.kind_id = std::move(kind);
  s.category = cat;
  s.group = std::move(group);
  s.name = std::move(name);
  s.icon = std::move(icon);
  s.description = std::move(description);
  s.properties = std::move(props);
  return s;
}

std::vector<ComponentSpec> feedback_specs() {
  const auto F = Category::feedback;
  std::vector<ComponentSpec> v;
  // robot
  v.push_back(spec("robot-path", F, "robot", "Robot path", "timeline",
                   "Polyline of the robot's upcoming tool-center-point motion.",
                   {agent(), ranged("width", K::floating, 0.001, 1.0, 0.01), color("#FF0000FF")}));
  v.push_back(spec("robot-waypoints", F, "robot", "Robot waypoints", "scatter_plot",
                   "Markers at the waypoints of the robot's upcoming motion.",
                   {agent(), ranged("size", K::floating, 0.001, 1.0, 0.03), color("#FFA500FF")}));
  v.push_back(spec("robot-silhouette", F, "robot", "Robot silhouette", "precision_manufacturing",
                   "Ghost of the robot at the end of its upcoming motion.",
                   {agent(), prop("model", K::text, false, ""), color("#00FFFF80"),
                    ranged("opacity", K::floating, 0.0, 1.0, 0.5)}));
  v.push_back(spec("robot-state", F, "robot", "Robot state", "info",
                   "Shows whether the robot is playing, paused or stopped.", {agent(), anchor(), pose()}));
  v.push_back(spec("robot-sensor", F, "robot", "Robot sensor", "speed",
                   "Live value of a named robot or tool sensor.",
                   {agent(), prop("sensor", K::text, true, "pressure"), prop("unit", K::text, false, ""),
                    prop("min", K::floating, false, 0.0), prop("max", K::floating, false, 100.0), anchor(),
                    pose(), color("#00FF00FF")}));
  v.push_back(spec("robot-task-status", F, "robot", "Robot task status", "pending_actions",
                   "Current robot task and its progress.", {agent(), anchor(), pose()}));
  // task
  v.push_back(spec("task-image", F, "task", "Task image", "image",
                   "Panel with the image and description of the agent's current task.",
                   {agent(), anchor(), pose(), ranged("size", K::floating, 0.05, 2.0, 0.3)}));
  v.push_back(spec("task-part-image", F, "task", "Task part image", "category",
                   "Images of the parts needed for the current task.",
                   {agent(), anchor(), pose(), ranged("size", K::floating, 0.05, 2.0, 0.3)}));
  v.push_back(spec("task-highlight", F, "task", "Task highlight", "highlight",
                   "Highlights the location of the current task step.",
                   {agent(), color("#FFFF00FF"), ranged("opacity", K::floating, 0.0, 1.0, 0.5)}));
  v.push_back(spec("task-model-highlight", F, "task", "Task model highlight", "view_in_ar",
                   "Highlights the model for the current task; selectable by gaze and pinch.",
                   {agent(), prop("model", K::text, false, ""), color("#FFFF00FF"),
                    ranged("radius", K::floating, 0.01, 2.0, 0.15)}));
  v.back().implicit_condition = "gaze-pinch";
  v.push_back(spec("tool-highlight", F, "task", "Tool highlight", "build",
                   "Highlights a tool from the bill of materials.", {ref("tool", Reference::tool), color("#00FFFFFF")}));
  v.push_back(spec("part-highlight", F, "task", "Part highlight", "extension",
                   "Highlights a part from the bill of materials.", {ref("part", Reference::part), color("#00FFFFFF")}));
  v.push_back(spec("task-list-status", F, "task", "Task list status", "checklist",
                   "Overall task list with per-task status.",
                   {anchor(), pose(), prop("show-completed", K::boolean, false, true), statuses()}));
  v.push_back(spec("step-instructions-3d", F, "task", "3D step instructions", "format_list_numbered",
                   "Text instructions placed in the workspace.",
                   {anchor(), pose(), prop("text", K::text, false, ""), ranged("size", K::floating, 0.01, 2.0, 0.1),
                    prop("scale", K::vector3, false, json::array({1.0, 1.0, 1.0}))}));
  // general
  v.push_back(spec("indicator-3d", F, "general", "3D indicator", "radio_button_checked",
                   "Primitive shape in the workspace; poking it activates its condition.",
                   {anchor(), pose(), choice("shape", {"sphere", "cube", "cylinder", "arrow"}, "sphere"),
                    color("#FFFFFFFF"), ranged("radius", K::floating, 0.01, 1.0, 0.05)}));
  v.back().implicit_condition = "poke";
  v.push_back(spec("icon", F, "general", "Icon", "emoji_objects", "Status icon placed in the workspace.",
                   {anchor(), pose(), choice("icon", {"info", "warning", "error", "check", "robot", "hand"}, "info"),
                    color("#FFFFFFFF"), ranged("size", K::floating, 0.01, 2.0, 0.1)}));
  v.push_back(spec("zone", F, "general", "Zone", "fence",
                   "Semi-transparent wall along a polygon published for a zone id.",
                   {prop("zone-id", K::text, true), color("#FF000080"), ranged("height", K::floating, 0.0, 5.0, 2.0),
                    ranged("opacity", K::floating, 0.0, 1.0, 0.3)}));
  v.push_back(spec("light", F, "general", "Light", "lightbulb", "Physical light in the workstation.",
                   {prop("device", K::text, true), color("#FFFFFFFF"), choice("mode", {"on", "off", "blink"}, "on")}));
  v.push_back(spec("sound", F, "general", "Sound", "volume_up", "Spatial audio cue.",
                   {anchor(), pose(), choice("clip", {"beep", "chime", "alarm", "click"}, "beep"),
                    ranged("volume", K::floating, 0.0, 1.0, 0.8), prop("loop", K::boolean, false, false)}));
  v.push_back(spec("message", F, "general", "Message", "chat", "Text panel placed in the workspace.",
                   {anchor(), pose(), prop("text", K::text, false, ""), color("#FFFFFFFF"),
                    ranged("size", K::floating, 0.01, 2.0, 0.2)}));
  return v;
}

std::vector<ComponentSpec> action_specs() {
  const auto A = Category::action;
  auto with_trigger = [](std::vector<PropertySchema> props) {
    props.insert(props.begin(), {trigger(), edge()});
    return props;
  };
  std::vector<ComponentSpec> v;
  v.push_back(spec("robot-play-pause", A, "robot", "Robot play/pause", "play_circle",
                   "Toggles the robot program between playing and paused.", with_trigger({agent()})));
  v.push_back(spec("robot-acknowledge", A, "robot", "Robot acknowledge", "thumb_up",
                   "Tells the robot it may start its next task.", with_trigger({agent()})));
  v.push_back(spec("robot-move-mode", A, "robot", "Robot move mode", "pan_tool",
                   "Switches the robot into hand-guiding mode.", with_trigger({agent()})));
  v.push_back(spec("complete-task", A, "task", "Complete task", "task_alt",
                   "Confirms completion of the agent's active task.",
                   with_trigger({agent(), ref("task", Reference::task, false)})));
  v.push_back(spec("reassign-task", A, "task", "Reassign task", "swap_horiz",
                   "Assigns a task to a different agent.", with_trigger({ref("task", Reference::task), agent()})));
  v.push_back(spec("select-task", A, "task", "Select task", "touch_app",
                   "Selects a task to show more information about it.", with_trigger({ref("task", Reference::task)})));
  v.push_back(spec("acknowledge", A, "general", "Acknowledge", "done",
                   "General acknowledgment recorded by the system.",
                   with_trigger({prop("message", K::text, false, "")})));
  v.push_back(spec("global-play-pause", A, "general", "Global play/pause", "pause_circle",
                   "Toggles play/pause for every robot in the workstation.", with_trigger({})));
  v.push_back(spec("send-mqtt-message", A, "general", "Send MQTT message", "send",
                   "Publishes a custom JSON message on a topic.",
                   with_trigger({prop("topic", K::text, true), prop("payload", K::text, false, "{}"),
                                 prop("retained", K::boolean, false, false)})));
  v.push_back(spec("toggle-feedback", A, "general", "Toggle feedback", "visibility",
                   "Enables or disables a feedback component.", with_trigger({ref("feedback", Reference::feedback)})));
  return v;
}

std::vector<ComponentSpec> condition_specs() {
  const auto C = Category::condition;
  auto target = [] { return ref("target", Reference::feedback); };
  std::vector<ComponentSpec> v;
  v.push_back(spec("proximity", C, "spatial", "Proximity", "social_distance",
                   "Distance between two anchors compared against a threshold.",
                   {prop("anchor-a", K::anchor, true), prop("anchor-b", K::anchor, true),
                    ranged("threshold", K::floating, 0.0, 100.0, 3.0), choice("direction", {"within", "beyond"}, "within")}));
  v.push_back(spec("inside-zone", C, "spatial", "Inside zone", "select_all",
                   "Anchor lies inside the polygon of a zone.",
                   {prop("anchor", K::anchor, true), prop("zone-id", K::text, true)}));
  v.push_back(spec("gaze", C, "operator", "Gaze", "visibility", "User looks at a feedback element.",
                   {target(), window()}));
  v.push_back(spec("gaze-pinch", C, "operator", "Gaze + pinch", "pinch",
                   "User looks at a feedback element and pinches.", {target(), window()}));
  v.push_back(spec("poke", C, "operator", "Poke", "touch_app", "User pokes a feedback element.",
                   {target(), window()}));
  v.push_back(spec("speech-command", C, "operator", "Speech command", "mic", "User speaks a command token.",
                   {prop("command", K::text, true), window()}));
  v.push_back(spec("operator-skill", C, "operator", "Operator skill", "school",
                   "Operator skill level compared against a level.",
                   {agent(), choice("comparison", {"at-least", "at-most", "equal"}, "at-least"),
                    ranged("level", K::integer, 0, 10, 1)}));
  v.push_back(spec("robot-run-state", C, "robot", "Robot run state", "smart_toy", "Robot is in the configured run state.",
                   {agent(), choice("state", {"playing", "paused", "stopped"}, "playing")}));
  v.push_back(spec("robot-moving", C, "robot", "Robot moving", "directions_run", "Robot is currently moving.",
                   {agent()}));
  v.push_back(spec("robot-sensor-threshold", C, "robot", "Robot sensor threshold", "sensors",
                   "Named robot sensor above or below a threshold.",
                   {agent(), prop("sensor", K::text, true), prop("threshold", K::floating, true),
                    choice("direction", {"above", "below"}, "above")}));
  v.push_back(spec("robot-assistance", C, "robot", "Robot assistance", "support",
                   "Robot has raised its assistance flag.", {agent()}));
  v.push_back(spec("workstation-button", C, "environment", "Workstation button", "smart_button",
                   "A physical workstation button was pressed.", {prop("button", K::text, true), window()}));
  v.push_back(spec("message-received", C, "environment", "Message received", "mark_email_unread",
                   "A message on a topic matched a field/value predicate.",
                   {prop("topic", K::text, true), prop("field", K::text, false, ""), prop("value", K::text, false, ""),
                    choice("mode", {"event", "latched"}, "event"), window()}));
  v.push_back(spec("task-status", C, "task", "Task status", "rule", "Task is in the configured status.",
                   {ref("task", Reference::task),
                    choice("status", {"pending", "ready", "active", "completed"}, "completed")}));
  v.push_back(spec("task-assigned-to", C, "task", "Task assigned to", "assignment_ind",
                   "Task is assigned to the configured agent.", {ref("task", Reference::task), agent()}));
  auto operands = [] {
    return std::vector<PropertySchema>{prop("a", K::condition, true), prop("b", K::condition, true),
                                       prop("c", K::condition), prop("d", K::condition)};
  };
  v.push_back(spec("and", C, "logic", "AND", "join_inner", "Active when all operands are active.", operands()));
  v.push_back(spec("or", C, "logic", "OR", "join_full", "Active when any operand is active.", operands()));
  v.push_back(spec("not", C, "logic", "NOT", "block", "Active when the operand is inactive.",
                   {prop("operand", K::condition, true)}));
  return v;
}

std::vector<ComponentSpec> builtin_specs() {
  std::vector<ComponentSpec> all = feedback_specs();
  for (auto& s : action_specs()) all.push_back(std::move(s));
  for (auto& s : condition_specs()) all.push_back(std::move(s));
  return all;
}

}  // namespace

std::string_view to_string(PropertyKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::optional<PropertyKind> property_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<PropertyKind>(i);
  }
  return std::nullopt;
}

bool ComponentSpec::positionable() const { return property("pose") != nullptr; }

const PropertySchema* ComponentSpec::property(std::string_view pname) const {
  auto it = std::find_if(properties.begin(), properties.end(), [&](const auto& p) { return p.name == pname; });
  return it == properties.end() ? nullptr : &*it;
}

Registry::Registry(std::vector<ComponentSpec> specs) : specs_(std::move(specs)) {
  std::set<std::string, std::less<>> seen;
  for (const auto& s : specs_) {
    if (!seen.insert(s.kind_id).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate kind id '" + s.kind_id + "'");
    }
  }
}

const ComponentSpec* Registry::find(std::string_view kind_id) const {
  auto it = std::find_if(specs_.begin(), specs_.end(), [&](const auto& s) { return s.kind_id == kind_id; });
  return it == specs_.end() ? nullptr : &*it;
}

const ComponentSpec& Registry::at(std::string_view kind_id) const {
  if (const auto* s = find(kind_id)) return *s;
  throw Error(ErrorCode::not_found, "unknown component kind '" + std::string(kind_id) + "'");
}

std::size_t Registry::count(Category category) const {
  return static_cast<std::size_t>(
      std::count_if(specs_.begin(), specs_.end(), [&](const auto& s) { return s.category == category; }));
}

Registry Registry::with(ComponentSpec spec) const {
  auto specs = specs_;
  specs.push_back(std::move(spec));
  return Registry(std::move(specs));
}

const Registry& builtin_registry() {
  static const Registry reg(builtin_specs());
  return reg;
}

Category category_of(const ComponentDescriptor& desc, const Registry& reg) { return reg.at(desc.kind).category; }

json spec_to_json(const ComponentSpec& spec) {
  json props = json::array();
  for (const auto& p : spec.properties) {
    json jp = {{"name", p.name}, {"kind", to_string(p.kind)}, {"required", p.required}};
    if (!p.domain.empty()) jp["domain"] = p.domain;
    if (p.min) jp["min"] = *p.min;
    if (p.max) jp["max"] = *p.max;
    if (p.reference != Reference::none) {
      static constexpr std::array<std::string_view, 5> names = {"none", "feedback", "task", "part", "tool"};
      jp["reference"] = names[static_cast<std::size_t>(p.reference)];
    }
    if (!p.default_value.is_null()) jp["default"] = p.default_value;
    props.push_back(std::move(jp));
  }
  json j = {{"kind", spec.kind_id},       {"category", to_string(spec.category)},
            {"group", spec.group},        {"name", spec.name},
            {"icon", spec.icon},          {"description", spec.description},
            {"properties", std::move(props)}};
  if (!spec.implicit_condition.empty()) j["implicit_condition"] = spec.implicit_condition;
  return j;
}

}  // namespace arthur
