#include "arthur/assembly/service.hpp"

#include <algorithm>

#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::assembly {

json bop_signature(const Workstation& ws) {
  json tasks = json::array();
  for (const auto& t : ws.tasks) tasks.push_back({{"id", t.id}, {"predecessors", t.predecessors}, {"agent", t.agent}});
  json agents = json::object();
  for (const auto& [id, a] : ws.agents) agents[id] = to_string(a.role);
  return {{"tasks", tasks}, {"agents", agents}};
}

AssemblyService::AssemblyService(std::unique_ptr<bus::Connection> connection, const Workstation& ws,
                                 std::optional<std::filesystem::path> state_file)
    : Service(kName, ws.id, std::move(connection)),
      ws_(ws),
      graph_(ws),
      state_file_(std::move(state_file)),
      config_(ws.id) {
  if (state_file_ && std::filesystem::exists(*state_file_)) {
    graph_.restore(json::parse(read_file(*state_file_)));
  }
  graph_.take_notices();  // activity before start is not news
}

void AssemblyService::start(std::int64_t now_ms) {
  const auto& ws = workstation_id();
  std::vector<std::string> stale;
  const auto probe = bus().subscribe(bus::topics::task_status(ws, "+"), [&](const bus::Envelope& e) {
    if (e.retained && !e.payload.is_null()) stale.push_back(e.topic);
  });
  bus().poll();
  bus().unsubscribe(probe);
  Service::start(now_ms);
  publish_changes();
  for (const auto& t : stale) {
    if (published_.count(t) == 0) bus().publish(t, nullptr, true);
  }
  serve(bus::topics::rpc_request(ws, kName), bus::topics::rpc_response(ws, kName),
        [this](const std::string& op, const json& args) { return handle(op, args); });
  bus().subscribe(bus::topics::action_events(ws), [this](const bus::Envelope& e) { on_action(e); });
  bus().subscribe(config_.filter(), [this](const bus::Envelope& e) { on_config(e); });
}

json AssemblyService::task_json(const TaskState& t) const {
  json j = {{"status", to_string(t.status)}, {"agent", t.agent}, {"order", t.order}, {"completed_by", t.completed_by}};
  if (const auto* task = ws_.task(t.id)) j["name"] = task->name;
  return j;
}

json AssemblyService::progress_json() const {
  json active = json::object();
  for (const auto& t : graph_.tasks()) {
    if (t.status == TaskStatus::active) active[t.agent].push_back(t.id);
  }
  return {{"completed", graph_.completed()},
          {"total", graph_.tasks().size()},
          {"fraction", graph_.progress()},
          {"active", active},
          {"timestamp_ms", now_ms()}};
}

void AssemblyService::publish_changes() {
  const auto& ws = workstation_id();
  std::map<std::string, json> next;
  for (const auto& t : graph_.tasks()) next[bus::topics::task_status(ws, t.id)] = task_json(t);
  for (const auto& [topic, payload] : published_) {
    if (next.count(topic) == 0) bus().publish(topic, nullptr, true);
  }
  for (const auto& [topic, payload] : next) {
    auto it = published_.find(topic);
    if (it == published_.end() || it->second != payload) {
      auto stamped = payload;
      stamped["timestamp_ms"] = now_ms();
      bus().publish(topic, std::move(stamped), true);
    }
  }
  published_ = std::move(next);
  for (const auto& n : graph_.take_notices()) {
    bus().publish(bus::topics::assembly_dispatch(ws),
                  {{"type", n.type}, {"task", n.task}, {"agent", n.agent}, {"timestamp_ms", now_ms()}});
  }
  auto progress = progress_json();
  auto comparable = progress;
  comparable.erase("timestamp_ms");
  if (comparable != published_progress_) {
    bus().publish(bus::topics::assembly_progress(ws), progress, true);
    published_progress_ = std::move(comparable);
  }
  if (state_file_) write_file_atomic(*state_file_, canonical(graph_.state_json()));
}

json AssemblyService::handle(const std::string& op, const json& args) {
  auto str = [&](const char* key) {
    if (!args.contains(key) || !args[key].is_string()) {
      throw Error(ErrorCode::invalid_argument, std::string("missing string argument '") + key + "'");
    }
    return args[key].get<std::string>();
  };
  if (op == "status") {
    json tasks = json::array();
    for (const auto& t : graph_.tasks()) {
      auto j = task_json(t);
      j["id"] = t.id;
      tasks.push_back(j);
    }
    return {{"tasks", tasks}, {"progress", progress_json()}, {"selected", selected_}};
  }
  if (op == "progress") return progress_json();
  if (op == "next_task") {
    const auto id = graph_.next_task(str("agent"));
    publish_changes();
    if (!id) return {{"task", nullptr}};
    const auto* t = ws_.task(*id);
    return {{"task", *id}, {"descriptor", t != nullptr ? to_json(*t) : json(nullptr)}};
  }
  if (op == "complete_task") {
    graph_.complete(str("task"), str("agent"));
    publish_changes();
    return progress_json();
  }
  if (op == "reassign_task") {
    const auto id = str("task");
    graph_.reassign(id, str("agent"));
    publish_changes();
    auto j = task_json(graph_.task(id));
    j["id"] = id;
    return j;
  }
  if (op == "select_task") {
    const auto id = str("task");
    (void)graph_.task(id);
    selected_ = id;
    bus().publish(bus::topics::assembly_dispatch(workstation_id()),
                  {{"type", "select"}, {"task", id}, {"agent", args.value("agent", std::string())}, {"timestamp_ms", now_ms()}});
    return {{"selected", id}};
  }
  throw Error(ErrorCode::invalid_argument, "unknown op '" + op + "'");
}

void AssemblyService::reject(const std::string& kind, const json& props, const Error& err) {
  log_.push_back(kind + ": " + err.what());
  bus().publish(bus::topics::assembly_dispatch(workstation_id()),
                {{"type", "rejected"},
                 {"action", kind},
                 {"properties", props},
                 {"error", {{"code", to_string(err.code())}, {"message", err.detail()}}},
                 {"timestamp_ms", now_ms()}});
}

void AssemblyService::on_action(const bus::Envelope& e) {
  const auto& p = e.payload;
  if (!p.is_object()) return;
  const auto kind = p.value("kind", std::string());
  if (kind != "complete-task" && kind != "reassign-task" && kind != "select-task") return;
  const auto props = p.value("properties", json::object());
  try {
    if (kind == "complete-task") {
      const auto agent = props.value("agent", std::string());
      auto task = props.value("task", std::string());
      if (task.empty()) {
        const auto active = graph_.active_task(agent);
        if (!active) throw Error(ErrorCode::not_found, "agent '" + agent + "' has no active task");
        task = *active;
      }
      handle("complete_task", {{"task", task}, {"agent", agent}});
    } else if (kind == "reassign-task") {
      handle("reassign_task", props);
    } else {
      handle("select_task", props);
    }
  } catch (const Error& err) {
    reject(kind, props, err);
  }
}

void AssemblyService::on_config(const bus::Envelope& e) {
  if (!config_.apply(e) || config_.revision() == config_revision_) return;
  std::optional<Workstation> ws;
  try {
    ws = config_.workstation();
  } catch (const Error&) {
    return;  // partial config; the next meta message completes it
  }
  if (!ws) return;
  config_revision_ = config_.revision();
  const bool bop_changed = bop_signature(*ws) != bop_signature(ws_);
  // Operator tasks activate on load, so only a completion counts as a started run.
  const bool started = graph_.completed() > 0;
  if (!bop_changed) {
    ws_ = std::move(*ws);  // names, descriptions and programs follow live edits
    publish_changes();
    return;
  }
  if (started) {
    log_.push_back("BoP changed at revision " + std::to_string(config_revision_) + " after tasks completed; restart to apply");
    return;
  }
  try {
    TaskGraph next(*ws);
    graph_ = std::move(next);
    ws_ = std::move(*ws);
  } catch (const Error& err) {
    log_.push_back(std::string("BoP rejected: ") + err.what());
    return;
  }
  publish_changes();
}

json AssemblyService::status_detail() const {
  return {{"completed", graph_.completed()}, {"total", graph_.tasks().size()}, {"diagnostics", log_.size()}};
}

}  // namespace arthur::assembly
