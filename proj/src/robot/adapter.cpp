#include "arthur/robot/adapter.hpp"

#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::robot {

RobotAdapterService::RobotAdapterService(std::unique_ptr<bus::Connection> connection, std::string workstation_id,
                                         std::string agent, RobotModel model, SimOptions options, JointVector home)
    : Service(std::string(kName) + "-" + agent, std::move(workstation_id), std::move(connection)),
      agent_(std::move(agent)),
      sim_(std::move(model), options, home) {}

void RobotAdapterService::start(std::int64_t now_ms) {
  const auto& ws = workstation_id();
  assembly_ = std::make_unique<bus::RpcClient>(bus(), bus::topics::rpc_request(ws, "assembly"),
                                               bus::topics::rpc_response(ws, "assembly"));
  serve(bus::topics::robot_rpc_request(ws, agent_), bus::topics::robot_rpc_response(ws, agent_),
        [this](const std::string& op, const json& args) { return handle(op, args); });
  bus().subscribe(bus::topics::action_events(ws), [this](const bus::Envelope& e) { on_action(e); });
  bus().subscribe(bus::topics::assembly_dispatch(ws), [this](const bus::Envelope& e) { on_dispatch(e); });
  Service::start(now_ms);
  next_sample_ms_ = now_ms;
  next_poll_ms_ = now_ms;
  publish_sample(now_ms);
}

void RobotAdapterService::publish_sample(std::int64_t timestamp_ms) {
  auto s = sim_.step(timestamp_ms);
  bus().publish(bus::topics::robot_state(workstation_id(), agent_), to_json(s), true);
  last_ = std::move(s);
  if (auto done = sim_.take_finished()) completions_.push_back(*done);
  next_sample_ms_ = timestamp_ms + sim_.period_ms();
}

void RobotAdapterService::on_tick(std::int64_t now_ms) {
  while (next_sample_ms_ <= now_ms) publish_sample(next_sample_ms_);
  if (outstanding_ && now_ms - outstanding_->sent_ms >= backoff_ms_) {
    ++failures_;
    log_.push_back("assembly did not answer " + outstanding_->op + " within " + std::to_string(backoff_ms_) + " ms");
    backoff_ms_ = std::min(backoff_ms_ * 2, kMaxBackoffMs);
    auto retry = std::move(*outstanding_);
    outstanding_.reset();
    send(retry.op, std::move(retry.args));
    heartbeat("up");
    return;
  }
  if (outstanding_) return;
  if (!completions_.empty()) {
    send("complete_task", {{"task", completions_.front()}, {"agent", agent_}});
  } else if (sim_.ready_for_task() && now_ms >= next_poll_ms_) {
    send("next_task", {{"agent", agent_}});
  }
}

void RobotAdapterService::send(const std::string& op, json args) {
  Outstanding o{"", op, args, now_ms()};
  o.id = assembly_->call(op, std::move(args), [this](const json& r) { on_response(r); });
  outstanding_ = std::move(o);
}

void RobotAdapterService::on_response(const json& response) {
  if (!outstanding_ || response.value("id", std::string()) != outstanding_->id) return;
  const auto op = outstanding_->op;
  outstanding_.reset();
  if (failures_ > 0) {
    failures_ = 0;
    backoff_ms_ = kRpcTimeoutMs;
    heartbeat("up");
  }
  const bool ok = response.value("ok", false);
  if (op == "complete_task") {
    if (!ok) log_.push_back("complete_task rejected: " + response.value("error", json::object()).dump());
    completions_.erase(completions_.begin());
    return;
  }
  if (!ok) {
    log_.push_back("next_task rejected: " + response.value("error", json::object()).dump());
    next_poll_ms_ = now_ms() + kPollIntervalMs;
    return;
  }
  const auto& result = response.at("result");
  if (result.at("task").is_null()) {
    next_poll_ms_ = now_ms() + kPollIntervalMs;
    return;
  }
  try {
    sim_.start_task(task_from_json(result.at("descriptor")));
  } catch (const Error& e) {
    log_.push_back(std::string("cannot run task: ") + e.what());
    next_poll_ms_ = now_ms() + kPollIntervalMs;
  }
}

void RobotAdapterService::on_action(const bus::Envelope& e) {
  const auto& p = e.payload;
  if (!p.is_object()) return;
  const auto kind = p.value("kind", std::string());
  if (kind == "global-play-pause") {
    sim_.play_pause();
    return;
  }
  if (kind != "robot-play-pause" && kind != "robot-acknowledge" && kind != "robot-move-mode") return;
  const auto props = p.value("properties", json::object());
  if (!props.is_object() || !props.contains("agent") || !props["agent"].is_string()) {
    log_.push_back(kind + " without an agent ignored");
    return;
  }
  if (props["agent"] != agent_) return;
  handle(kind == "robot-play-pause" ? "play_pause" : kind == "robot-acknowledge" ? "acknowledge" : "move_mode",
         json::object());
}

void RobotAdapterService::on_dispatch(const bus::Envelope& e) {
  const auto& p = e.payload;
  if (!p.is_object() || p.value("type", std::string()) != "revoke" || p.value("agent", std::string()) != agent_) return;
  if (p.value("task", std::string()) == sim_.task()) {
    log_.push_back("task " + sim_.task() + " revoked");
    sim_.abort_task();
  }
}

json RobotAdapterService::handle(const std::string& op, const json& args) {
  auto mode = [this] { return json{{"mode", to_string(sim_.mode())}}; };
  if (op == "state") return last_ ? to_json(*last_) : json(nullptr);
  if (op == "play_pause") {
    sim_.play_pause();
    return mode();
  }
  if (op == "move_mode") {
    if (!sim_.toggle_move_mode()) log_.push_back("move_mode ignored while stopped");
    return mode();
  }
  if (op == "stop") {
    if (!sim_.stop()) log_.push_back("stop ignored while " + std::string(to_string(sim_.mode())));
    return mode();
  }
  if (op == "acknowledge") {
    const bool released = sim_.acknowledge();
    if (!released) log_.push_back("acknowledge with no pending gate");
    return {{"released", released}};
  }
  if (op == "poll_next_task") {
    if (!sim_.ready_for_task()) return {{"polled", false}, {"reason", sim_.task().empty() ? "not playing or not acknowledged" : "busy"}};
    next_poll_ms_ = now_ms();
    return {{"polled", true}};
  }
  if (op == "update_progress") {
    const auto task = args.value("task", std::string());
    if (task.empty() || task != sim_.task()) throw Error(ErrorCode::invalid_argument, "not the current task: '" + task + "'");
    if (args.value("done", false)) {
      sim_.finish_task();
      if (auto done = sim_.take_finished()) completions_.push_back(*done);
    }
    return {{"task", task}};
  }
  throw Error(ErrorCode::invalid_argument, "unknown op '" + op + "'");
}

json RobotAdapterService::status_detail() const {
  return {{"agent", agent_},
          {"mode", to_string(sim_.mode())},
          {"task", sim_.task()},
          {"assembly", failures_ > 0 ? "unreachable" : "ok"},
          {"retries", failures_}};
}

}  // namespace arthur::robot
