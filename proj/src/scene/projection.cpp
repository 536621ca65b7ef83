#include "arthur/scene/projection.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "arthur/core/anchors.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/registry.hpp"

namespace arthur::scene {

namespace {

double round6(double v) {
  const double r = std::round(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;
}

json rounded(const json& j) {
  if (j.is_number_float()) return round6(j.get<double>());
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto& v : out) v = rounded(v);
    return out;
  }
  return j;
}

json with_defaults(const ComponentDescriptor& d, const ComponentSpec& spec) {
  json props = d.properties;
  for (const auto& p : spec.properties) {
    if (!props.contains(p.name) && !p.default_value.is_null()) props[p.name] = p.default_value;
  }
  return props;
}

TaskStatus status_of(const std::string& task, const WorldState& world) {
  auto it = world.tasks.find(task);
  return it == world.tasks.end() ? TaskStatus::pending : it->second.status;
}

const RobotState* robot_of(const std::string& agent, const WorldState& world) {
  auto it = world.robots.find(agent);
  return it == world.robots.end() ? nullptr : &it->second;
}

void fill(SceneNode& n, const ComponentDescriptor& d, const ProjectionInput& in) {
  const auto& ws = in.ws;
  const auto& world = in.world;
  const auto& p = n.properties;
  const auto agent_id = p.value("agent", std::string());
  const Agent* agent = ws.agent(agent_id);
  auto current = [&]() { return current_task_for(agent_id, ws, world); };
  auto base = [&]() -> std::optional<Pose> {
    if (agent == nullptr || agent->role != AgentRole::robot) return std::nullopt;
    return robot_base_pose(*agent, ws, world);
  };
  const auto& kind = d.kind;
  if (kind == "robot-state") {
    const auto* r = robot_of(agent_id, world);
    n.data = r == nullptr ? json{{"run_state", "unknown"}}
                          : json{{"run_state", to_string(r->run_state)}, {"move_mode", r->move_mode},
                                 {"waiting_for_ack", r->waiting_for_ack}};
  } else if (kind == "robot-sensor") {
    const auto* r = robot_of(agent_id, world);
    const auto sensor = p.value("sensor", std::string("pressure"));
    json value = nullptr;
    if (r != nullptr) {
      if (auto it = r->sensors.find(sensor); it != r->sensors.end()) value = it->second;
    }
    n.data = {{"sensor", sensor}, {"value", value}};
  } else if (kind == "robot-task-status") {
    const auto* r = robot_of(agent_id, world);
    n.data = r == nullptr ? json{{"task", nullptr}} : json{{"task", r->task}, {"progress", r->progress}};
  } else if (kind == "robot-path" || kind == "robot-waypoints" || kind == "robot-silhouette") {
    const Task* t = current();
    n.data = {{"task", t == nullptr ? json(nullptr) : json(t->id)}};
    const auto b = base();
    if (t == nullptr || !b) return;
    if (kind == "robot-path") {
      auto it = in.previews.find({agent_id, t->id});
      if (it == in.previews.end() || it->second.empty()) {
        n.note = "no preview recorded for " + t->id;
        return;
      }
      for (const auto& tcp : it->second) n.points.push_back(compose(*b, tcp).position());
      return;
    }
    auto model = agent == nullptr ? in.models.end() : in.models.find(agent->robot_type);
    if (t->program.empty()) return;
    if (kind == "robot-waypoints") {
      if (model == in.models.end()) {
        n.note = "no kinematic model for " + (agent ? agent->robot_type : std::string());
        return;
      }
      for (const auto& q : t->program) n.points.push_back(compose(*b, robot::fk(model->second, q)).position());
    } else {
      n.data["q"] = t->program.back();
      if (model != in.models.end()) n.pose = compose(*b, robot::fk(model->second, t->program.back()));
    }
  } else if (kind == "task-image" || kind == "task-part-image") {
    const Task* t = current();
    if (t == nullptr) {
      n.data = {{"task", nullptr}};
    } else if (kind == "task-image") {
      n.data = {{"task", t->id}, {"name", t->name}, {"description", t->description}, {"image", t->image}};
    } else {
      json parts = json::array();
      for (const auto& pid : t->parts) {
        auto it = ws.parts.find(pid);
        parts.push_back(it == ws.parts.end() ? pid : it->second.name);
      }
      n.data = {{"task", t->id}, {"parts", parts}};
    }
  } else if (kind == "task-highlight" || kind == "task-model-highlight") {
    const Task* t = current();
    n.data = {{"task", t == nullptr ? json(nullptr) : json(t->id)}};
  } else if (kind == "tool-highlight" || kind == "part-highlight") {
    const bool tool = kind == "tool-highlight";
    const auto id = p.value(tool ? "tool" : "part", std::string());
    const auto& items = tool ? ws.tools : ws.parts;
    auto it = items.find(id);
    n.data = {{"item", id}, {"name", it == items.end() ? json(nullptr) : json(it->second.name)}};
    if (it != items.end() && !it->second.anchor.empty()) n.pose = resolve_anchor(it->second.anchor, ws, world);
  } else if (kind == "task-list-status") {
    std::set<std::string> shown;
    for (const auto& s : p.value("statuses", json::array())) shown.insert(s.get<std::string>());
    const bool show_completed = p.value("show-completed", true);
    json tasks = json::array();
    for (const auto& t : ws.tasks) {
      const auto st = status_of(t.id, world);
      if (shown.count(std::string(to_string(st))) == 0) continue;
      if (st == TaskStatus::completed && !show_completed) continue;
      tasks.push_back({{"id", t.id}, {"status", to_string(st)}});
    }
    n.data = {{"tasks", tasks}};
  } else if (kind == "zone") {
    const auto zone = p.value("zone-id", std::string());
    auto it = world.zones.find(zone);
    if (it == world.zones.end()) {
      n.note = "no points published for zone " + zone;
    } else {
      n.points = it->second;
    }
  }
}

}  // namespace

std::vector<SceneNode> project(const ProjectionInput& in) {
  std::vector<SceneNode> nodes;
  for (const auto* d : in.ws.components_of(Category::feedback)) {
    SceneNode n;
    n.id = d->id;
    n.kind = d->kind;
    const auto* spec = builtin_registry().find(d->kind);
    n.properties = spec == nullptr ? d->properties : with_defaults(*d, *spec);
    std::string why;
    n.visible = conditions::visibility(d->id, in.ws, in.report, &why);
    try {
      n.pose = feedback_world_pose(*d, in.ws, in.world);
      fill(n, *d, in);
    } catch (const Error& e) {
      n.visible = false;
      why = e.what();
    }
    if (!why.empty()) n.note = why;
    nodes.push_back(std::move(n));
  }
  return nodes;
}

std::string dump_scene(const std::vector<SceneNode>& nodes) {
  std::ostringstream out;
  for (const auto& n : nodes) {
    out << n.id << ' ' << n.kind << " visible=" << (n.visible ? 1 : 0) << " pose=";
    if (n.pose) {
      const auto& t = n.pose->position();
      auto q = n.pose->orientation();
      if (q.w() < 0) q.coeffs() = -q.coeffs();
      out << rounded(json::array({t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()})).dump();
    } else {
      out << '-';
    }
    json pts = json::array();
    for (const auto& v : n.points) pts.push_back({v.x(), v.y(), v.z()});
    out << " points=" << rounded(pts).dump() << " data=" << rounded(n.data).dump()
        << " props=" << rounded(n.properties).dump();
    if (!n.note.empty()) out << " note=" << n.note;
    out << '\n';
  }
  return out.str();
}

json to_json(const SceneNode& n) {
  json pts = json::array();
  for (const auto& v : n.points) pts.push_back(vec3_to_json(v));
  return {{"id", n.id},
          {"kind", n.kind},
          {"visible", n.visible},
          {"pose", n.pose ? pose_to_json(*n.pose) : json(nullptr)},
          {"points", pts},
          {"data", n.data},
          {"properties", n.properties},
          {"note", n.note}};
}

conditions::EvaluationReport report_from_state(const json& state) {
  conditions::EvaluationReport r;
  if (!state.is_object()) return r;
  r.timestamp_ms = state.value("timestamp_ms", std::int64_t{0});
  const auto active = state.value("active", json::object());
  const auto invalid = state.value("invalid", json::object());
  for (const auto& [id, v] : active.items()) {
    if (v.is_boolean()) r.active[id] = v.get<bool>();
  }
  for (const auto& [id, v] : invalid.items()) {
    if (v.is_string()) r.invalid[id] = v.get<std::string>();
  }
  return r;
}

}  // namespace arthur::scene
