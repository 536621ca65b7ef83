#include "arthur/conditions/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <set>

#include "arthur/bus/topic.hpp"
#include "arthur/core/anchors.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/validate.hpp"

namespace arthur::conditions {

namespace {

constexpr std::array<std::string_view, 3> kEdges = {"rising", "falling", "while-active"};

/// Property value, falling back to the schema default.
json prop(const ComponentDescriptor& d, const ComponentSpec& spec, const std::string& name) {
  auto it = d.properties.find(name);
  if (it != d.properties.end() && !it->is_null()) return *it;
  const auto* s = spec.property(name);
  return s != nullptr ? s->default_value : json();
}

std::string text(const ComponentDescriptor& d, const ComponentSpec& spec, const std::string& name) {
  const auto v = prop(d, spec, name);
  return v.is_string() ? v.get<std::string>() : std::string();
}

bool recent_event(const WorldState& w, InputType type, const std::string& target, std::int64_t window) {
  return std::any_of(w.events.begin(), w.events.end(), [&](const InputEvent& e) {
    return e.type == type && !e.unresolved && e.target == target && in_window(e.timestamp_ms, w.now_ms, window);
  });
}

bool any_pinch(const WorldState& w, const std::string& target, std::int64_t window) {
  return std::any_of(w.events.begin(), w.events.end(), [&](const InputEvent& e) {
    return e.type == InputType::pinch && (e.target.empty() || e.target == target) &&
           in_window(e.timestamp_ms, w.now_ms, window);
  });
}

const json* field_at(const json& payload, const std::string& path) {
  const json* cur = &payload;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto dot = path.find('.', start);
    const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object() || !cur->contains(key)) return nullptr;
    cur = &(*cur)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return cur;
}

bool message_matches(const MessageEvent& m, const std::string& field, const std::string& value) {
  if (field.empty()) return true;
  const json* f = field_at(m.payload, field);
  if (f == nullptr) return false;
  if (value.empty()) return true;
  return f->is_string() ? f->get<std::string>() == value : f->dump() == value;
}

double cross(const Vec3& o, const Vec3& a, const Vec3& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

Error dangling(const std::string& what, const std::string& id) {
  return Error(ErrorCode::dangling_reference, "unknown " + what + " '" + id + "'");
}

}  // namespace

std::string_view to_string(Edge e) { return kEdges[static_cast<std::size_t>(e)]; }

std::optional<Edge> edge_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kEdges.size(); ++i) {
    if (kEdges[i] == s) return static_cast<Edge>(i);
  }
  return std::nullopt;
}

bool EvaluationReport::is_active(const std::string& id) const {
  auto it = active.find(id);
  return it != active.end() && it->second;
}

json to_json(const Firing& f) {
  return {{"action", f.action},       {"kind", f.kind},
          {"condition", f.condition}, {"edge", to_string(f.edge)},
          {"properties", f.properties}, {"timestamp_ms", f.timestamp_ms}};
}

json to_json(const EvaluationReport& r) {
  json fired = json::array();
  for (const auto& f : r.fired) fired.push_back(to_json(f));
  json edges = json::array();
  for (const auto& e : r.edges) edges.push_back({{"condition", e.condition}, {"edge", e.rising ? "rising" : "falling"}});
  return {{"timestamp_ms", r.timestamp_ms}, {"active", r.active}, {"invalid", r.invalid},
          {"notes", r.notes},               {"edges", edges},     {"fired", fired}};
}

bool in_window(std::int64_t event_ms, std::int64_t now_ms, std::int64_t window_ms) {
  return event_ms <= now_ms && now_ms - event_ms <= window_ms;
}

bool proximity_active(double distance, double threshold, bool beyond) {
  return beyond ? distance > threshold : distance < threshold;
}

bool inside_convex_hull_xy(const Vec3& p, const std::vector<Vec3>& points) {
  std::vector<Vec3> pts = points;
  std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
              return a.x() == b.x() && a.y() == b.y();
            }),
            pts.end());
  if (pts.size() < 3) return false;
  // Andrew's monotone chain, counter-clockwise.
  std::vector<Vec3> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& q : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], q) <= 0) --k;
    hull[k++] = q;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    if (cross(hull[i], hull[(i + 1) % hull.size()], p) < 0) return false;
  }
  return true;
}

bool gaze_hits(const Pose& head, const Vec3& center, double radius) {
  const Vec3 dir = head.orientation() * Vec3::UnitZ();
  const Vec3 oc = center - head.position();
  const double r2 = radius * radius;
  if (oc.squaredNorm() <= r2) return true;
  const double t = oc.dot(dir);
  if (t < 0) return false;
  return oc.squaredNorm() - t * t <= r2;
}

bool evaluate(const ComponentDescriptor& d, const Workstation& ws, const WorldState& w,
              const std::map<std::string, bool>& operands, std::string* note, const Registry& registry) {
  const auto& spec = registry.at(d.kind);
  const auto& k = d.kind;
  auto window = [&] {
    const auto v = prop(d, spec, "window-ms");
    return v.is_number_integer() ? v.get<std::int64_t>() : kDefaultWindowMs;
  };
  auto set_note = [&](const std::string& s) {
    if (note != nullptr) *note = s;
  };
  auto operand = [&](const std::string& name) -> std::optional<bool> {
    const auto id = text(d, spec, name);
    if (id.empty()) return std::nullopt;
    auto it = operands.find(id);
    if (it == operands.end()) throw dangling("condition", id);
    return it->second;
  };
  auto robot = [&]() -> const RobotState* {
    const auto agent = text(d, spec, "agent");
    if (ws.agent(agent) == nullptr) throw dangling("agent", agent);
    auto it = w.robots.find(agent);
    if (it == w.robots.end()) {
      set_note("no state from robot '" + agent + "'");
      return nullptr;
    }
    return &it->second;
  };
  auto target = [&] {
    const auto id = text(d, spec, "target");
    if (ws.component(id) == nullptr) throw dangling("feedback", id);
    return id;
  };

  if (k == "and" || k == "or") {
    bool all = true, any = false;
    for (const char* name : {"a", "b", "c", "d"}) {
      if (auto v = operand(name)) {
        all = all && *v;
        any = any || *v;
      }
    }
    return k == "and" ? all : any;
  }
  if (k == "not") return !operand("operand").value_or(false);
  if (k == "proximity") {
    const auto a = text(d, spec, "anchor-a"), b = text(d, spec, "anchor-b");
    for (const auto& id : {a, b}) {
      if (ws.anchors.count(id) == 0) throw dangling("anchor", id);
    }
    try {
      const double dist = (resolve_anchor(a, ws, w).position() - resolve_anchor(b, ws, w).position()).norm();
      return proximity_active(dist, prop(d, spec, "threshold").get<double>(), text(d, spec, "direction") == "beyond");
    } catch (const Error& e) {
      set_note(e.detail());
      return false;
    }
  }
  if (k == "inside-zone") {
    const auto a = text(d, spec, "anchor");
    if (ws.anchors.count(a) == 0) throw dangling("anchor", a);
    auto z = w.zones.find(text(d, spec, "zone-id"));
    if (z == w.zones.end()) {
      set_note("no points for zone '" + text(d, spec, "zone-id") + "'");
      return false;
    }
    try {
      return inside_convex_hull_xy(resolve_anchor(a, ws, w).position(), z->second);
    } catch (const Error& e) {
      set_note(e.detail());
      return false;
    }
  }
  if (k == "poke") return recent_event(w, InputType::poke, target(), window());
  if (k == "gaze" || k == "gaze-pinch") {
    const auto id = target();
    bool looking = recent_event(w, InputType::gaze, id, window());
    if (!looking) {
      auto head = w.body.find(BodyPart::head);
      if (head != w.body.end()) {
        const auto& fb = *ws.component(id);
        try {
          if (auto pose = feedback_world_pose(fb, ws, w)) {
            const auto r = fb.properties.value("radius", kDefaultGazeRadius);
            looking = gaze_hits(head->second, pose->position(), r);
          }
        } catch (const Error& e) {
          set_note(e.detail());
        }
      }
    }
    if (k == "gaze") return looking;
    return looking && any_pinch(w, id, window());
  }
  if (k == "speech-command") return recent_event(w, InputType::speech, text(d, spec, "command"), window());
  if (k == "workstation-button") return recent_event(w, InputType::button, text(d, spec, "button"), window());
  if (k == "operator-skill") {
    const auto* a = ws.agent(text(d, spec, "agent"));
    if (a == nullptr) throw dangling("agent", text(d, spec, "agent"));
    const auto level = prop(d, spec, "level").get<int>();
    const auto cmp = text(d, spec, "comparison");
    if (cmp == "at-most") return a->skill_level <= level;
    if (cmp == "equal") return a->skill_level == level;
    return a->skill_level >= level;
  }
  if (k == "robot-run-state") {
    const auto* r = robot();
    return r != nullptr && to_string(r->run_state) == text(d, spec, "state");
  }
  if (k == "robot-moving") {
    const auto* r = robot();
    return r != nullptr && r->moving;
  }
  if (k == "robot-assistance") {
    const auto* r = robot();
    return r != nullptr && r->assistance;
  }
  if (k == "robot-sensor-threshold") {
    const auto* r = robot();
    if (r == nullptr) return false;
    auto s = r->sensors.find(text(d, spec, "sensor"));
    if (s == r->sensors.end()) {
      set_note("robot reports no sensor '" + text(d, spec, "sensor") + "'");
      return false;
    }
    const double th = prop(d, spec, "threshold").get<double>();
    return text(d, spec, "direction") == "below" ? s->second < th : s->second > th;
  }
  if (k == "message-received") {
    const auto filter = text(d, spec, "topic");
    const auto field = text(d, spec, "field"), value = text(d, spec, "value");
    if (text(d, spec, "mode") == "latched") {
      const MessageEvent* latest = nullptr;
      for (const auto& [topic, m] : w.latest_messages) {
        if (!bus::topic_matches(filter, topic)) continue;
        if (latest == nullptr || m.timestamp_ms >= latest->timestamp_ms) latest = &m;
      }
      return latest != nullptr && message_matches(*latest, field, value);
    }
    const auto win = window();
    return std::any_of(w.messages.begin(), w.messages.end(), [&](const MessageEvent& m) {
      return bus::topic_matches(filter, m.topic) && in_window(m.timestamp_ms, w.now_ms, win) &&
             message_matches(m, field, value);
    });
  }
  if (k == "task-status" || k == "task-assigned-to") {
    const auto id = text(d, spec, "task");
    const auto* t = ws.task(id);
    if (t == nullptr) throw dangling("task", id);
    auto info = w.tasks.find(id);
    if (k == "task-status") {
      const auto status = info == w.tasks.end() ? TaskStatus::pending : info->second.status;
      return to_string(status) == text(d, spec, "status");
    }
    const auto agent = info == w.tasks.end() || info->second.agent.empty() ? t->agent : info->second.agent;
    return agent == text(d, spec, "agent");
  }
  throw Error(ErrorCode::unsupported_kind, "no evaluator for condition kind '" + k + "'");
}

std::vector<std::string> evaluation_order(const Workstation& ws, const Registry& registry) {
  if (auto cycle = find_condition_cycle(ws, registry); !cycle.empty()) {
    std::string msg;
    for (const auto& id : cycle) msg += (msg.empty() ? "" : " -> ") + id;
    throw Error(ErrorCode::cycle, "condition cycle: " + msg);
  }
  std::vector<std::string> order;
  std::set<std::string> done;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    if (!done.insert(id).second) return;
    for (const auto& op : condition_operands(ws.components.at(id), registry)) {
      const auto* c = ws.component(op);
      if (c != nullptr && registry.at(c->kind).category == Category::condition) visit(op);
    }
    order.push_back(id);
  };
  for (const auto& [id, d] : ws.components) {
    if (registry.at(d.kind).category == Category::condition) visit(id);
  }
  return order;
}

EvaluationReport evaluate_all(const Workstation& ws, const WorldState& world, const EvaluationReport* previous,
                              const Registry& registry) {
  EvaluationReport r;
  r.timestamp_ms = world.now_ms;
  for (const auto& id : evaluation_order(ws, registry)) {
    const auto& d = ws.components.at(id);
    bool active = false;
    if (auto v = validate_component(d, ws, registry); !v.empty()) {
      r.invalid[id] = describe(v);
    } else {
      std::string note;
      try {
        active = evaluate(d, ws, world, r.active, &note, registry);
      } catch (const Error& e) {
        r.invalid[id] = e.detail();
      }
      if (!note.empty()) r.notes[id] = note;
    }
    r.active[id] = active;
  }
  for (const auto& [id, now] : r.active) {
    const bool before = previous != nullptr && previous->is_active(id);
    if (now != before) r.edges.push_back({id, now});
  }
  for (const auto& [id, d] : ws.components) {
    const auto& spec = registry.at(d.kind);
    if (spec.category != Category::action) continue;
    const auto trigger = text(d, spec, "trigger");
    if (trigger.empty()) continue;
    if (auto v = validate_component(d, ws, registry); !v.empty()) {
      r.invalid[id] = describe(v);
      continue;
    }
    if (r.invalid.count(trigger) > 0) continue;
    const auto edge = edge_from_string(text(d, spec, "edge")).value_or(Edge::rising);
    const bool now = r.is_active(trigger);
    const bool before = previous != nullptr && previous->is_active(trigger);
    const bool fire = (edge == Edge::rising && now && !before) || (edge == Edge::falling && !now && before) ||
                      (edge == Edge::while_active && now);
    if (!fire) continue;
    json props = json::object();
    for (const auto& p : spec.properties) {
      auto v = prop(d, spec, p.name);
      if (!v.is_null()) props[p.name] = std::move(v);
    }
    r.fired.push_back({id, d.kind, trigger, edge, std::move(props), world.now_ms});
  }
  return r;
}

bool visibility(const std::string& feedback_id, const Workstation& ws, const EvaluationReport& report,
                std::string* diagnostic) {
  auto diag = [&](const std::string& s) {
    if (diagnostic != nullptr) *diagnostic = s;
    return false;
  };
  const auto* d = ws.component(feedback_id);
  if (d == nullptr) return diag("unknown feedback '" + feedback_id + "'");
  if (!d->enabled) return diag("disabled");
  if (!d->visibility) return true;
  const auto& c = *d->visibility;
  if (ws.component(c) == nullptr) return diag("visibility condition '" + c + "' does not exist");
  if (auto it = report.invalid.find(c); it != report.invalid.end()) {
    return diag("visibility condition '" + c + "' is invalid: " + it->second);
  }
  return report.is_active(c);
}

}  // namespace arthur::conditions
