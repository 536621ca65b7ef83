#include "arthur/authoring/authoring.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::authoring {

namespace {

constexpr std::array<std::string_view, 6> kEntityNames = {"agent", "tracker", "anchor", "tool", "part", "task"};

bool is_body_anchor(std::string_view id) { return id == kUserHead || id == kUserHandLeft || id == kUserHandRight; }

std::vector<Violation> structural_problems(const Workstation& ws, const Registry& reg) {
  return validate_workstation(ws, /*tolerate_component_refs=*/true, reg);
}

ComponentDescriptor& component_or_throw(Workstation& ws, const std::string& id) {
  auto it = ws.components.find(id);
  if (it == ws.components.end()) throw Error(ErrorCode::unknown_id, "no component '" + id + "'");
  return it->second;
}

}  // namespace

ImplicitMap default_implicit_map(const Registry& registry) {
  ImplicitMap m;
  for (const auto& s : registry.specs()) {
    if (!s.implicit_condition.empty()) m[s.kind_id] = s.implicit_condition;
  }
  return m;
}

std::optional<Entity> entity_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kEntityNames.size(); ++i) {
    if (kEntityNames[i] == s) return static_cast<Entity>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Entity e) { return kEntityNames[static_cast<std::size_t>(e)]; }

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_' || c == '.';
  });
}

Authoring::Authoring(Workstation ws, const Registry& registry, ImplicitMap implicit)
    : ws_(std::move(ws)), registry_(&registry), implicit_(std::move(implicit)) {
  for (const auto& [kind, cond] : implicit_) {
    if (registry.at(kind).category != Category::feedback || registry.at(cond).category != Category::condition) {
      throw Error(ErrorCode::invalid_argument, "implicit mapping " + kind + " -> " + cond + " is not feedback -> condition");
    }
  }
  if (auto problems = structural_problems(ws_, registry); !problems.empty()) {
    throw Error(ErrorCode::validation, "workstation '" + ws_.id + "': " + describe(problems));
  }
}

Authoring Authoring::open(const std::filesystem::path& store, const Registry& registry) {
  Authoring a(load_workstation(store), registry);
  a.store_ = store;
  return a;
}

void Authoring::persist_to(std::filesystem::path store) {
  save_workstation(store, ws_);
  store_ = std::move(store);
}

void Authoring::require_structural() const {
  if (ws_.phase == Phase::operation) {
    throw Error(ErrorCode::phase, "structural changes are frozen in the operation phase");
  }
}

std::string Authoring::fresh_id(Workstation& ws, const std::string& base) const {
  while (true) {
    auto id = base + "-" + std::to_string(ws.next_serial++);
    if (ws.components.count(id) == 0) return id;
  }
}

template <typename F>
std::uint64_t Authoring::commit(bool structural, F&& mutate) {
  if (structural) require_structural();
  Workstation next = ws_;
  mutate(next);
  if (auto problems = structural_problems(next, *registry_); !problems.empty()) {
    bool dangling = std::all_of(problems.begin(), problems.end(),
                                [](const auto& v) { return v.code == Violation::Code::dangling_reference; });
    throw Error(dangling ? ErrorCode::dangling_reference : ErrorCode::validation, describe(problems));
  }
  next.revision = ws_.revision + 1;
  if (store_) save_workstation(*store_, next);
  ws_ = std::move(next);
  return ws_.revision;
}

CreateResult Authoring::create_component(const std::string& kind, json properties, std::optional<std::string> id,
                                         std::optional<std::string> visibility) {
  CreateResult result;
  const auto& spec = registry_->at(kind);
  if (id && (!valid_id(*id))) throw Error(ErrorCode::invalid_argument, "invalid component id '" + *id + "'");
  if (id && ws_.components.count(*id) > 0) throw Error(ErrorCode::invalid_argument, "component '" + *id + "' exists");
  if (properties.is_null()) properties = json::object();
  result.revision = commit(true, [&](Workstation& ws) {
    ComponentDescriptor d;
    d.id = id ? *id : fresh_id(ws, kind);
    d.kind = kind;
    d.properties = std::move(properties);
    d.visibility = std::move(visibility);
    if (auto v = validate_component(d, ws, *registry_); !v.empty()) {
      throw Error(ErrorCode::validation, d.id + ": " + describe(v));
    }
    result.id = d.id;
    ws.components[d.id] = d;
    if (auto it = implicit_.find(kind); it != implicit_.end() && spec.category == Category::feedback) {
      ComponentDescriptor c;
      c.id = d.id + "-" + it->second;
      if (ws.components.count(c.id) > 0) c.id = fresh_id(ws, c.id);
      c.kind = it->second;
      c.properties = {{"target", d.id}};
      c.implicit = true;
      c.owner = d.id;
      ws.components[c.id] = c;
      result.implicit.push_back(c.id);
    }
  });
  return result;
}

std::uint64_t Authoring::update_property(const std::string& id, const std::string& name, json value) {
  return commit(false, [&](Workstation& ws) {
    auto& d = component_or_throw(ws, id);
    const auto& spec = registry_->at(d.kind);
    const auto* schema = spec.property(name);
    if (schema == nullptr) throw Error(ErrorCode::validation, d.kind + " has no property '" + name + "'");
    if (d.implicit && name == "target") throw Error(ErrorCode::immutable, id + " is bound to '" + d.owner + "'");
    if (value.is_null()) {
      if (schema->required) throw Error(ErrorCode::validation, "'" + name + "' is required");
      d.properties.erase(name);
      return;
    }
    if (auto v = check_property(*schema, value, ws); !v.empty()) {
      throw Error(ErrorCode::type_mismatch, id + ": " + describe(v));
    }
    d.properties[name] = std::move(value);
  });
}

std::uint64_t Authoring::set_visibility(const std::string& id, std::optional<std::string> condition) {
  return commit(false, [&](Workstation& ws) {
    auto& d = component_or_throw(ws, id);
    d.visibility = std::move(condition);
    auto v = validate_component(d, ws, *registry_);
    v.erase(std::remove_if(v.begin(), v.end(), [](const auto& x) { return x.property != "visibility"; }), v.end());
    if (!v.empty()) throw Error(ErrorCode::validation, id + ": " + describe(v));
  });
}

std::uint64_t Authoring::set_enabled(const std::string& id, bool enabled) {
  return commit(false, [&](Workstation& ws) {
    auto& d = component_or_throw(ws, id);
    if (category_of(d, *registry_) != Category::feedback) {
      throw Error(ErrorCode::invalid_argument, "only feedback can be enabled or disabled");
    }
    d.enabled = enabled;
  });
}

DeleteResult Authoring::delete_component(const std::string& id) {
  DeleteResult result;
  result.revision = commit(true, [&](Workstation& ws) {
    const auto& d = component_or_throw(ws, id);
    if (d.implicit) throw Error(ErrorCode::immutable, id + " is removed together with '" + d.owner + "'");
    result.deleted.push_back(id);
    std::set<std::string> cascaded;
    for (const auto& [cid, c] : ws.components) {
      if (c.implicit && c.owner == id) {
        result.deleted.push_back(cid);
        cascaded.insert(cid);
      }
    }
    for (const auto& gone : result.deleted) ws.components.erase(gone);
    // Bindings to the cascaded conditions go with them; explicit references stay and are flagged.
    for (auto& [cid, c] : ws.components) {
      if (c.visibility && cascaded.count(*c.visibility) > 0) c.visibility.reset();
      if (category_of(c, *registry_) != Category::action) continue;
      auto t = c.properties.find("trigger");
      if (t != c.properties.end() && t->is_string() && cascaded.count(t->get<std::string>()) > 0) {
        c.properties.erase(t);
      }
    }
  });
  return result;
}

std::uint64_t Authoring::upsert(Entity entity, const json& value) {
  return commit(true, [&](Workstation& ws) {
    switch (entity) {
      case Entity::agent: {
        auto a = agent_from_json(value);
        if (!valid_id(a.id)) throw Error(ErrorCode::invalid_argument, "invalid agent id '" + a.id + "'");
        ws.agents[a.id] = a;
        break;
      }
      case Entity::tracker: {
        auto t = tracker_from_json(value);
        if (!valid_id(t.id)) throw Error(ErrorCode::invalid_argument, "invalid tracker id '" + t.id + "'");
        if (t.root_anchor_id.empty()) t.root_anchor_id = t.id + "-root";
        auto& root = ws.anchors[t.root_anchor_id];
        root.id = t.root_anchor_id;
        if (root.label.empty()) root.label = t.label.empty() ? t.id : t.label;
        root.parent = {AnchorParent::Type::tracker_root, t.id};
        root.local_pose = Pose::identity();
        ws.trackers[t.id] = t;
        break;
      }
      case Entity::anchor: {
        auto a = anchor_from_json(value);
        if (!valid_id(a.id)) throw Error(ErrorCode::invalid_argument, "invalid anchor id '" + a.id + "'");
        if (is_body_anchor(a.id)) throw Error(ErrorCode::immutable, "'" + a.id + "' is a built-in body anchor");
        ws.anchors[a.id] = a;
        break;
      }
      case Entity::tool:
      case Entity::part: {
        auto item = item_from_json(value);
        if (!valid_id(item.id)) throw Error(ErrorCode::invalid_argument, "invalid item id '" + item.id + "'");
        (entity == Entity::tool ? ws.tools : ws.parts)[item.id] = item;
        break;
      }
      case Entity::task: {
        auto t = task_from_json(value);
        if (!valid_id(t.id)) throw Error(ErrorCode::invalid_argument, "invalid task id '" + t.id + "'");
        auto it = std::find_if(ws.tasks.begin(), ws.tasks.end(), [&](const auto& x) { return x.id == t.id; });
        if (it == ws.tasks.end()) {
          ws.tasks.push_back(std::move(t));
        } else {
          *it = std::move(t);
        }
        break;
      }
    }
  });
}

std::uint64_t Authoring::remove(Entity entity, const std::string& id) {
  return commit(true, [&](Workstation& ws) {
    auto missing = [&] { return Error(ErrorCode::unknown_id, "no " + std::string(to_string(entity)) + " '" + id + "'"); };
    switch (entity) {
      case Entity::agent:
        if (ws.agents.erase(id) == 0) throw missing();
        break;
      case Entity::tracker: {
        auto it = ws.trackers.find(id);
        if (it == ws.trackers.end()) throw missing();
        ws.anchors.erase(it->second.root_anchor_id);
        ws.trackers.erase(it);
        break;
      }
      case Entity::anchor:
        if (is_body_anchor(id)) throw Error(ErrorCode::immutable, "'" + id + "' is a built-in body anchor");
        if (ws.anchors.erase(id) == 0) throw missing();
        break;
      case Entity::tool:
        if (ws.tools.erase(id) == 0) throw missing();
        break;
      case Entity::part:
        if (ws.parts.erase(id) == 0) throw missing();
        break;
      case Entity::task: {
        auto it = std::find_if(ws.tasks.begin(), ws.tasks.end(), [&](const auto& t) { return t.id == id; });
        if (it == ws.tasks.end()) throw missing();
        ws.tasks.erase(it);
        break;
      }
    }
  });
}

std::uint64_t Authoring::set_phase(Phase phase) {
  return commit(false, [&](Workstation& ws) { ws.phase = phase; });
}

std::uint64_t Authoring::set_position(const std::string& id, const Pose& pose) {
  if (ws_.phase != Phase::refinement) throw Error(ErrorCode::phase, "positions are set in the refinement phase");
  return commit(false, [&](Workstation& ws) {
    if (auto a = ws.anchors.find(id); a != ws.anchors.end()) {
      if (is_body_anchor(id)) throw Error(ErrorCode::immutable, "'" + id + "' follows the tracked user");
      if (a->second.parent.type == AnchorParent::Type::tracker_root) {
        throw Error(ErrorCode::immutable, "'" + id + "' is the origin of tracker '" + a->second.parent.ref + "'");
      }
      a->second.local_pose = pose;
      return;
    }
    auto& d = component_or_throw(ws, id);
    if (!registry_->at(d.kind).positionable()) {
      throw Error(ErrorCode::immutable, d.kind + " '" + id + "' cannot be re-positioned");
    }
    d.properties["pose"] = pose_to_json(pose);
  });
}

std::map<std::string, std::string> Authoring::diagnostics() const {
  std::map<std::string, std::string> out;
  for (const auto& [id, d] : ws_.components) {
    auto v = validate_component(d, ws_, *registry_);
    v.erase(std::remove_if(v.begin(), v.end(), [](const auto& x) { return !is_component_reference(x); }), v.end());
    if (!v.empty()) out[id] = describe(v);
  }
  return out;
}

}  // namespace arthur::authoring
