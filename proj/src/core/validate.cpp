#include "arthur/core/validate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "arthur/core/anchors.hpp"

#include "arthur/core/error.hpp"

namespace arthur {

namespace {

using Code = Violation::Code;

Violation make(Code code, const std::string& property, std::string message) {
  return {code, property, std::move(message), {}};
}

bool reference_exists(Reference ref, const std::string& id, const Workstation& ws) {
  switch (ref) {
    case Reference::feedback: {
      const auto* d = ws.component(id);
      return d != nullptr && category_of(*d) == Category::feedback;
    }
    case Reference::task: return ws.task(id) != nullptr;
    case Reference::part: return ws.parts.count(id) > 0;
    case Reference::tool: return ws.tools.count(id) > 0;
    case Reference::none: return true;
  }
  return true;
}

void check_range(const PropertySchema& s, double v, std::vector<Violation>& out) {
  if ((s.min && v < *s.min) || (s.max && v > *s.max)) {
    out.push_back(make(Code::out_of_range, s.name,
                       s.name + " = " + std::to_string(v) + " outside [" +
                           (s.min ? std::to_string(*s.min) : "-inf") + ", " +
                           (s.max ? std::to_string(*s.max) : "inf") + "]"));
  }
}

}  // namespace

std::string_view to_string(Violation::Code code) {
  static constexpr std::array<std::string_view, 9> names = {
      "unknown-kind",  "unknown-property",   "missing",      "type-mismatch", "out-of-range",
      "not-in-domain", "dangling-reference", "duplicate-id", "cycle"};
  return names[static_cast<std::size_t>(code)];
}

bool is_color(const std::string& s) {
  if (s.size() != 7 && s.size() != 9) return false;
  if (s[0] != '#') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; });
}

std::vector<Violation> check_property(const PropertySchema& s, const json& value, const Workstation& ws) {
  std::vector<Violation> out;
  auto mismatch = [&](const char* expected) {
    out.push_back(make(Code::type_mismatch, s.name, s.name + ": expected " + expected + ", got " + value.dump()));
  };
  auto dangling = [&](const std::string& what, const std::string& id) {
    out.push_back(make(Code::dangling_reference, s.name, s.name + ": unknown " + what + " '" + id + "'"));
    out.back().target = what;
  };
  switch (s.kind) {
    case PropertyKind::boolean:
      if (!value.is_boolean()) mismatch("boolean");
      break;
    case PropertyKind::integer:
      if (!value.is_number_integer()) {
        mismatch("integer");
      } else {
        check_range(s, value.get<double>(), out);
      }
      break;
    case PropertyKind::floating:
      if (!value.is_number() || !std::isfinite(value.get<double>())) {
        mismatch("float");
      } else {
        check_range(s, value.get<double>(), out);
      }
      break;
    case PropertyKind::text:
      if (!value.is_string()) {
        mismatch("string");
      } else if (s.reference != Reference::none && !value.get<std::string>().empty() &&
                 !reference_exists(s.reference, value.get<std::string>(), ws)) {
        static constexpr std::array<const char*, 5> names = {"", "feedback", "task", "part", "tool"};
        dangling(names[static_cast<std::size_t>(s.reference)], value.get<std::string>());
      }
      break;
    case PropertyKind::anchor:
      if (!value.is_string()) {
        mismatch("anchor id");
      } else if (!value.get<std::string>().empty() && ws.anchors.count(value.get<std::string>()) == 0) {
        dangling("anchor", value.get<std::string>());
      }
      break;
    case PropertyKind::pose:
      try {
        (void)pose_from_json(value);
      } catch (const Error&) {
        mismatch("pose {position:[x,y,z], orientation:[w,x,y,z]} with unit quaternion");
      }
      break;
    case PropertyKind::vector3:
      try {
        (void)vec3_from_json(value);
      } catch (const Error&) {
        mismatch("[x,y,z]");
      }
      break;
    case PropertyKind::condition:
      if (!value.is_string()) {
        mismatch("condition id");
      } else if (!value.get<std::string>().empty()) {
        const auto* d = ws.component(value.get<std::string>());
        if (d == nullptr || category_of(*d) != Category::condition) dangling("condition", value.get<std::string>());
      }
      break;
    case PropertyKind::color:
      if (!value.is_string() || !is_color(value.get<std::string>())) mismatch("color #RRGGBB or #RRGGBBAA");
      break;
    case PropertyKind::agent:
      if (!value.is_string()) {
        mismatch("agent id");
      } else if (ws.agents.count(value.get<std::string>()) == 0) {
        dangling("agent", value.get<std::string>());
      }
      break;
    case PropertyKind::enumeration:
      if (!value.is_string()) {
        mismatch("enum string");
      } else if (std::find(s.domain.begin(), s.domain.end(), value.get<std::string>()) == s.domain.end()) {
        out.push_back(make(Code::not_in_domain, s.name, s.name + ": '" + value.get<std::string>() + "' not in domain"));
      }
      break;
    case PropertyKind::multi_enumeration: {
      if (!value.is_array()) {
        mismatch("array of enum strings");
        break;
      }
      std::set<std::string> seen;
      for (const auto& e : value) {
        if (!e.is_string()) {
          mismatch("array of enum strings");
          break;
        }
        const auto v = e.get<std::string>();
        if (std::find(s.domain.begin(), s.domain.end(), v) == s.domain.end()) {
          out.push_back(make(Code::not_in_domain, s.name, s.name + ": '" + v + "' not in domain"));
        } else if (!seen.insert(v).second) {
          out.push_back(make(Code::type_mismatch, s.name, s.name + ": duplicate '" + v + "'"));
        }
      }
      break;
    }
  }
  return out;
}

std::vector<Violation> validate_component(const ComponentDescriptor& desc, const Workstation& ws,
                                          const Registry& registry) {
  std::vector<Violation> out;
  const auto* spec = registry.find(desc.kind);
  if (spec == nullptr) {
    out.push_back(make(Code::unknown_kind, "", "unknown component kind '" + desc.kind + "'"));
    return out;
  }
  if (!desc.properties.is_object()) {
    out.push_back(make(Code::type_mismatch, "", "properties must be an object"));
    return out;
  }
  for (auto it = desc.properties.begin(); it != desc.properties.end(); ++it) {
    const auto* schema = spec->property(it.key());
    if (schema == nullptr) {
      out.push_back(make(Code::unknown_property, it.key(), desc.kind + " has no property '" + it.key() + "'"));
      continue;
    }
    // Null clears an optional value.
    if (it->is_null() && !schema->required) continue;
    auto v = check_property(*schema, *it, ws);
    out.insert(out.end(), v.begin(), v.end());
  }
  for (const auto& schema : spec->properties) {
    if (!schema.required) continue;
    auto it = desc.properties.find(schema.name);
    if (it == desc.properties.end() || it->is_null()) {
      out.push_back(make(Code::missing, schema.name, "missing required property '" + schema.name + "'"));
    }
  }
  if (desc.visibility) {
    if (spec->category != Category::feedback) {
      out.push_back(make(Code::unknown_property, "visibility", "only feedback has a visibility condition"));
    } else {
      const auto* c = ws.component(*desc.visibility);
      if (c == nullptr || category_of(*c, registry) != Category::condition) {
        out.push_back(make(Code::dangling_reference, "visibility", "unknown condition '" + *desc.visibility + "'"));
        out.back().target = "condition";
      }
    }
  }
  return out;
}

bool is_component_reference(const Violation& v) {
  return v.code == Code::dangling_reference && (v.target == "condition" || v.target == "feedback");
}

std::vector<std::string> find_task_cycle(const std::vector<Task>& tasks) {
  std::map<std::string, const Task*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.id, &t);
  // 0 = unvisited, 1 = on stack, 2 = done
  std::map<std::string, int> mark;
  std::vector<std::string> stack;
  std::vector<std::string> cycle;
  std::function<bool(const std::string&)> visit = [&](const std::string& id) {
    mark[id] = 1;
    stack.push_back(id);
    for (const auto& p : by_id.at(id)->predecessors) {
      if (by_id.count(p) == 0) continue;
      if (mark[p] == 1) {
        auto it = std::find(stack.begin(), stack.end(), p);
        cycle.assign(it, stack.end());
        cycle.push_back(p);
        return true;
      }
      if (mark[p] == 0 && visit(p)) return true;
    }
    stack.pop_back();
    mark[id] = 2;
    return false;
  };
  for (const auto& t : tasks) {
    if (mark[t.id] == 0 && visit(t.id)) {
      // Predecessor edges point backwards; report in execution order.
      std::reverse(cycle.begin(), cycle.end());
      return cycle;
    }
  }
  return {};
}

std::vector<Violation> validate_bop(const std::vector<Task>& tasks, const std::map<std::string, Item>& parts,
                                    const std::map<std::string, Item>& tools) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const auto path = "tasks/" + std::to_string(i);
    if (t.id.empty()) out.push_back(make(Code::missing, path + "/id", "task without id"));
    if (!ids.insert(t.id).second) out.push_back(make(Code::duplicate_id, path + "/id", "duplicate task id '" + t.id + "'"));
  }
  auto dangling = [&](const std::string& path, const std::string& what, const std::string& id) {
    out.push_back(make(Code::dangling_reference, path, path + ": unknown " + what + " '" + id + "'"));
    out.back().target = what;
  };
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const auto path = "tasks/" + std::to_string(i);
    for (std::size_t k = 0; k < t.predecessors.size(); ++k) {
      if (ids.count(t.predecessors[k]) == 0) dangling(path + "/predecessors/" + std::to_string(k), "task", t.predecessors[k]);
    }
    for (std::size_t k = 0; k < t.parts.size(); ++k) {
      if (parts.count(t.parts[k]) == 0) dangling(path + "/parts/" + std::to_string(k), "part", t.parts[k]);
    }
    for (std::size_t k = 0; k < t.tools.size(); ++k) {
      if (tools.count(t.tools[k]) == 0) dangling(path + "/tools/" + std::to_string(k), "tool", t.tools[k]);
    }
  }
  if (auto cycle = find_task_cycle(tasks); !cycle.empty()) {
    std::string msg;
    for (const auto& id : cycle) msg += (msg.empty() ? "" : " -> ") + id;
    out.push_back(make(Code::cycle, "tasks", "precedence cycle: " + msg));
  }
  return out;
}

std::vector<std::string> condition_operands(const ComponentDescriptor& d, const Registry& registry) {
  std::vector<std::string> out;
  const auto& spec = registry.at(d.kind);
  if (spec.category != Category::condition) return out;
  for (const auto& p : spec.properties) {
    if (p.kind != PropertyKind::condition) continue;
    auto it = d.properties.find(p.name);
    if (it != d.properties.end() && it->is_string() && !it->get<std::string>().empty()) out.push_back(*it);
  }
  return out;
}

std::vector<std::string> find_condition_cycle(const Workstation& ws, const Registry& registry) {
  std::map<std::string, int> mark;
  std::vector<std::string> stack, cycle;
  std::function<bool(const std::string&)> visit = [&](const std::string& id) {
    mark[id] = 1;
    stack.push_back(id);
    for (const auto& op : condition_operands(ws.components.at(id), registry)) {
      const auto* c = ws.component(op);
      if (c == nullptr || registry.at(c->kind).category != Category::condition) continue;
      if (mark[op] == 1) {
        cycle.assign(std::find(stack.begin(), stack.end(), op), stack.end());
        cycle.push_back(op);
        return true;
      }
      if (mark[op] == 0 && visit(op)) return true;
    }
    stack.pop_back();
    mark[id] = 2;
    return false;
  };
  for (const auto& [id, d] : ws.components) {
    if (registry.at(d.kind).category != Category::condition) continue;
    if (mark[id] == 0 && visit(id)) return cycle;
  }
  return {};
}

std::vector<Violation> validate_workstation(const Workstation& ws, bool tolerate_component_refs,
                                            const Registry& registry) {
  std::vector<Violation> out;
  auto dangling = [&](const std::string& path, const std::string& what, const std::string& id) {
    out.push_back(make(Code::dangling_reference, path, path + ": unknown " + what + " '" + id + "'"));
    out.back().target = what;
  };
  for (const auto& [id, a] : ws.anchors) {
    const auto path = "anchors/" + id + "/parent";
    if (a.parent.type == AnchorParent::Type::anchor && ws.anchors.count(a.parent.ref) == 0) {
      dangling(path, "anchor", a.parent.ref);
    } else if (a.parent.type == AnchorParent::Type::tracker_root && ws.trackers.count(a.parent.ref) == 0) {
      dangling(path, "tracker", a.parent.ref);
    }
  }
  for (const auto& [id, a] : ws.anchors) {
    try {
      (void)anchor_chain(id, ws);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::anchor_cycle) out.push_back(make(Code::cycle, "anchors/" + id, e.detail()));
    }
  }
  for (const auto& [id, t] : ws.trackers) {
    auto it = ws.anchors.find(t.root_anchor_id);
    if (it == ws.anchors.end()) {
      dangling("trackers/" + id + "/root_anchor", "anchor", t.root_anchor_id);
    } else if (it->second.parent.type != AnchorParent::Type::tracker_root || it->second.parent.ref != id) {
      out.push_back(make(Code::type_mismatch, "trackers/" + id + "/root_anchor",
                         "root anchor '" + t.root_anchor_id + "' is not parented to tracker '" + id + "'"));
    }
  }
  for (const auto& [id, a] : ws.agents) {
    if (a.role == AgentRole::robot && ws.anchors.count(a.mount_anchor) == 0) {
      dangling("agents/" + id + "/mount_anchor", "anchor", a.mount_anchor);
    }
  }
  for (const auto* items : {&ws.parts, &ws.tools}) {
    for (const auto& [id, item] : *items) {
      if (!item.anchor.empty() && ws.anchors.count(item.anchor) == 0) {
        dangling((items == &ws.parts ? "parts/" : "tools/") + id + "/anchor", "anchor", item.anchor);
      }
    }
  }
  auto bop = validate_bop(ws.tasks, ws.parts, ws.tools);
  out.insert(out.end(), bop.begin(), bop.end());
  for (std::size_t i = 0; i < ws.tasks.size(); ++i) {
    const auto& t = ws.tasks[i];
    const auto path = "tasks/" + std::to_string(i);
    if (!t.agent.empty() && ws.agents.count(t.agent) == 0) dangling(path + "/agent", "agent", t.agent);
    if (!t.step_anchor.empty() && ws.anchors.count(t.step_anchor) == 0) {
      dangling(path + "/step_anchor", "anchor", t.step_anchor);
    }
  }
  if (auto cycle = find_condition_cycle(ws, registry); !cycle.empty()) {
    std::string msg;
    for (const auto& id : cycle) msg += (msg.empty() ? "" : " -> ") + id;
    out.push_back(make(Code::cycle, "components", "condition cycle: " + msg));
  }
  for (const auto& [id, d] : ws.components) {
    for (auto v : validate_component(d, ws, registry)) {
      if (tolerate_component_refs && is_component_reference(v)) continue;
      v.property = "components/" + id + (v.property.empty() ? "" : "/" + v.property);
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::string describe(const std::vector<Violation>& violations) {
  std::string s;
  for (const auto& v : violations) {
    if (!s.empty()) s += "; ";
    s += std::string(to_string(v.code)) + ": " + v.message;
  }
  return s;
}

}  // namespace arthur
