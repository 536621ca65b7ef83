#include "arthur/runtime/runtime.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "arthur/core/error.hpp"

#ifndef ARTHUR_DEFAULT_DATA_DIR
#define ARTHUR_DEFAULT_DATA_DIR "data"
#endif

namespace arthur::runtime {

std::filesystem::path default_data_dir() {
  if (const char* v = std::getenv("ARTHUR_DATA"); v != nullptr && *v != '\0') return v;
  return ARTHUR_DEFAULT_DATA_DIR;
}

scene::ModelMap load_models(const Workstation& ws, const std::filesystem::path& data_dir) {
  scene::ModelMap models;
  for (const auto& [id, a] : ws.agents) {
    if (a.role != AgentRole::robot || models.count(a.robot_type) > 0) continue;
    auto name = a.robot_type;
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto file = data_dir / "robots" / (name + ".dh");
    if (!std::filesystem::exists(file)) {
      throw Error(ErrorCode::load, "no kinematic model for robot type '" + a.robot_type + "' (" + file.string() + ")");
    }
    models[a.robot_type] = robot::load_robot_model(file);
  }
  return models;
}

Runtime::Runtime(Workstation ws, ConnectionFactory connect, Options options)
    : connect_(std::move(connect)), options_(std::move(options)), ws_id_(ws.id) {
  models_ = load_models(ws, options_.data_dir);
  authoring::Authoring model(ws);
  if (options_.store) model.persist_to(*options_.store);
  std::optional<std::filesystem::path> state;
  if (options_.store) state = options_.store->string() + ".assembly.json";
  assembly_ = std::make_unique<assembly::AssemblyService>(connect_("assembly"), ws, state);
  authoring_ = std::make_unique<authoring::AuthoringService>(connect_("authoring"), std::move(model), options_.seed);
  engine_ = std::make_unique<conditions::ConditionService>(connect_("condition-engine"), ws_id_);
  for (const auto& [id, a] : ws.agents) {
    if (a.role != AgentRole::robot) continue;
    robots_[id] = std::make_unique<robot::RobotAdapterService>(
        connect_("robot-" + id), ws_id_, id, models_.at(a.robot_type),
        robot::SimOptions{options_.robot_rate_hz, options_.require_ack});
  }
  preview_ = std::make_unique<preview::PreviewService>(connect_("preview"), ws_id_, options_.recordings_dir);
  for (int i = 0; i < options_.scene_clients; ++i) {
    const auto name = "hmd" + std::to_string(i + 1);
    clients_.push_back(std::make_unique<scene::SceneClient>(connect_("scene-" + name), ws_id_, name, models_));
  }
  control_ = connect_("control");
}

Runtime::~Runtime() { stop(); }

std::vector<bus::Service*> Runtime::services() {
  std::vector<bus::Service*> out = {authoring_.get(), engine_.get(), assembly_.get()};
  for (auto& [id, r] : robots_) out.push_back(r.get());
  out.push_back(preview_.get());
  return out;
}

void Runtime::start() {
  if (running_) return;
  running_ = true;
  for (auto* s : services()) s->start(now_);
  for (auto& c : clients_) c->start(now_);
  settle();
  tick_all();
}

void Runtime::stop() {
  if (!running_) return;
  running_ = false;
  for (auto* s : services()) s->stop();
}

void Runtime::tick_all() {
  for (auto* s : services()) s->tick(now_);
  for (auto& c : clients_) c->tick(now_);
  settle();
}

void Runtime::settle() {
  for (int round = 0; round < 10000; ++round) {
    std::size_t handled = 0;
    for (auto* s : services()) handled += s->pump();
    for (auto& c : clients_) handled += c->pump();
    handled += control_->poll();
    if (handled == 0) return;
  }
  throw Error(ErrorCode::transport, "bus did not settle after 10000 rounds");
}

void Runtime::advance_to(std::int64_t t_ms) {
  while (now_ + options_.step_ms <= t_ms) {
    now_ += options_.step_ms;
    tick_all();
  }
}

}  // namespace arthur::runtime
