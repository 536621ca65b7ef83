#include "arthur/scene/client.hpp"

#include "arthur/bus/topic.hpp"
#include "arthur/core/anchors.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/registry.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::scene {

SceneClient::SceneClient(std::unique_ptr<bus::Connection> connection, std::string workstation_id, std::string name,
                         ModelMap models)
    : connection_(std::move(connection)),
      ws_id_(std::move(workstation_id)),
      name_(std::move(name)),
      models_(std::move(models)),
      config_(ws_id_),
      world_(ws_id_) {}

void SceneClient::start(std::int64_t now_ms) {
  now_ms_ = now_ms;
  auto& c = *connection_;
  c.subscribe(config_.filter(), [this](const bus::Envelope& e) {
    if (config_.apply(e)) config_dirty_ = true;
  });
  world_.attach(c);
  c.subscribe(bus::topics::condition_report(ws_id_), [this](const bus::Envelope& e) {
    report_ = report_from_state(e.payload);
    report_revision_ = e.payload.is_object() ? e.payload.value("revision", std::uint64_t{0}) : 0;
  });
  c.subscribe(bus::topics::action_events(ws_id_), [this](const bus::Envelope& e) { actions_.push_back(e.payload); });
  authoring_ = std::make_unique<bus::RpcClient>(c, bus::topics::rpc_request(ws_id_, "authoring"),
                                                bus::topics::rpc_response(ws_id_, "authoring"));
  preview_ = std::make_unique<bus::RpcClient>(c, bus::topics::rpc_request(ws_id_, "preview"),
                                              bus::topics::rpc_response(ws_id_, "preview"));
  const auto svc = "scene-" + name_;
  c.subscribe(bus::topics::rpc_request(ws_id_, svc), [this, svc](const bus::Envelope& e) {
    if (e.retained || !e.payload.is_object()) return;
    const auto id = e.payload.value("id", std::string());
    json resp;
    try {
      resp = bus::rpc_ok(id, handle(e.payload.value("op", std::string()), e.payload.value("args", json::object())));
    } catch (const Error& err) {
      resp = bus::rpc_error(id, std::string(to_string(err.code())), err.detail());
    }
    connection_->publish(bus::topics::rpc_response(ws_id_, svc), std::move(resp));
  });
  tick(now_ms);
}

void SceneClient::tick(std::int64_t now_ms) {
  now_ms_ = now_ms;
  world_.set_now(now_ms);
  connection_->poll();
  world_.set_now(now_ms);
  refresh();
}

std::size_t SceneClient::pump() {
  const auto n = connection_->poll();
  if (n > 0) refresh();
  return n;
}

void SceneClient::refresh() {
  if (config_dirty_) {
    config_dirty_ = false;
    try {
      ws_ = config_.workstation();
    } catch (const Error& e) {
      log_.push_back(std::string("config: ") + e.what());
    }
  }
  // A completed task may have a new recording; forget what was cached for it.
  for (const auto& [task, info] : world_.world().tasks) {
    auto& seen = seen_status_[task];
    if (info.status == TaskStatus::completed && seen != TaskStatus::completed) {
      for (auto it = previews_.begin(); it != previews_.end();) {
        it = it->first.second == task ? previews_.erase(it) : std::next(it);
      }
      for (auto it = requested_.begin(); it != requested_.end();) {
        it = it->second == task ? requested_.erase(it) : std::next(it);
      }
    }
    seen = info.status;
  }
  if (!ws_) {
    nodes_.clear();
    return;
  }
  request_previews();
  nodes_ = project({*ws_, world_.world(), report_, previews_, models_});
}

void SceneClient::request_previews() {
  for (const auto* d : ws_->components_of(Category::feedback)) {
    if (d->kind != "robot-path") continue;
    const auto agent = d->properties.value("agent", std::string());
    const Task* t = current_task_for(agent, *ws_, world_.world());
    if (t == nullptr) continue;
    std::pair<std::string, std::string> key{agent, t->id};
    if (!requested_.insert(key).second) continue;
    preview_->call("get", {{"agent", agent}, {"task", t->id}}, [this, key](const json& r) {
      if (!r.value("ok", false)) return;
      const auto& rec = r.at("result");
      if (rec.is_null()) return;
      std::vector<Pose> tcps;
      for (const auto& s : rec.at("samples")) tcps.push_back(pose_from_json(s.at("tcp")));
      previews_[key] = std::move(tcps);
    });
  }
}

const SceneNode* SceneClient::node(const std::string& id) const {
  for (const auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

InputEvent SceneClient::inject(InputEvent e) {
  if (e.timestamp_ms == 0) e.timestamp_ms = now_ms_;
  const bool targets_feedback = e.type == InputType::poke || e.type == InputType::gaze || e.type == InputType::pinch;
  if (targets_feedback && !e.target.empty()) {
    const auto* d = ws_ ? ws_->component(e.target) : nullptr;
    e.unresolved = d == nullptr || builtin_registry().at(d->kind).category != Category::feedback;
    if (e.unresolved) log_.push_back("input targets unknown feedback '" + e.target + "'");
  }
  connection_->publish(bus::topics::input_events(ws_id_), to_json(e));
  return e;
}

void SceneClient::publish_body(const std::map<BodyPart, Pose>& body) {
  connection_->publish(bus::topics::user_body(ws_id_), bus::body_to_json(body, now_ms_), true);
}

std::string SceneClient::set_position(const std::string& id, const Pose& pose) {
  if (ws_) {
    if (const auto* d = ws_->component(id)) {
      const auto* spec = builtin_registry().find(d->kind);
      if (spec != nullptr && !spec->positionable()) {
        throw Error(ErrorCode::immutable, d->kind + " '" + id + "' cannot be re-positioned");
      }
    }
  }
  return request("set_position", {{"id", id}, {"pose", pose_to_json(pose)}});
}

std::string SceneClient::request(const std::string& op, json args) { return authoring_->call(op, std::move(args)); }

std::optional<json> SceneClient::response(const std::string& request_id) const {
  return authoring_->response(request_id);
}

json SceneClient::handle(const std::string& op, const json& args) const {
  if (op == "dump") return dump_scene();
  if (op == "nodes") {
    json list = json::array();
    for (const auto& n : nodes_) list.push_back(to_json(n));
    return list;
  }
  if (op == "node") {
    const auto* n = node(args.value("id", std::string()));
    return n == nullptr ? json(nullptr) : to_json(*n);
  }
  throw Error(ErrorCode::invalid_argument, "unknown op '" + op + "'");
}

}  // namespace arthur::scene
