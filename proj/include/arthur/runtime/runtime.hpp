#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arthur/assembly/service.hpp"
#include "arthur/authoring/service.hpp"
#include "arthur/bus/connection.hpp"
#include "arthur/conditions/service.hpp"
#include "arthur/preview/service.hpp"
#include "arthur/robot/adapter.hpp"
#include "arthur/scene/client.hpp"

namespace arthur::runtime {

using ConnectionFactory = std::function<std::unique_ptr<bus::Connection>(const std::string& client_id)>;

/// Data directory: $ARTHUR_DATA if set, else the source tree's data/ folder.
std::filesystem::path default_data_dir();

/// Robot models for every robot agent, read from <data>/robots/<robot_type lowercased>.dh.
scene::ModelMap load_models(const Workstation& ws, const std::filesystem::path& data_dir);

struct Options {
  std::int64_t step_ms = 10;
  std::uint64_t seed = 1;
  int robot_rate_hz = 25;
  bool require_ack = true;
  int scene_clients = 1;
  std::filesystem::path data_dir = default_data_dir();
  std::optional<std::filesystem::path> store;           // workstation store shared by authoring and assembly
  std::optional<std::filesystem::path> recordings_dir;  // preview files
};

/**
 * All services plus scene clients driven by one virtual clock. Each step
 * advances the clock by `step_ms`, ticks every participant in a fixed order
 * and then pumps until no envelope is left, so runs on the in-process broker
 * are deterministic.
 */
class Runtime {
 public:
  Runtime(Workstation ws, ConnectionFactory connect, Options options = {});
  ~Runtime();

  /// Starts every service at t = 0 and lets the retained state settle.
  void start();
  void stop();
  [[nodiscard]] std::int64_t now() const noexcept { return now_; }
  void advance_to(std::int64_t t_ms);
  void run_for(std::int64_t ms) { advance_to(now_ + ms); }
  /// Pumps every participant until a whole round handles nothing.
  void settle();

  authoring::AuthoringService& authoring() { return *authoring_; }
  conditions::ConditionService& engine() { return *engine_; }
  assembly::AssemblyService& assembly() { return *assembly_; }
  preview::PreviewService& preview() { return *preview_; }
  robot::RobotAdapterService& robot(const std::string& agent) { return *robots_.at(agent); }
  [[nodiscard]] const std::map<std::string, std::unique_ptr<robot::RobotAdapterService>>& robots() const { return robots_; }
  scene::SceneClient& client(std::size_t i = 0) { return *clients_.at(i); }
  [[nodiscard]] std::size_t client_count() const noexcept { return clients_.size(); }
  [[nodiscard]] const scene::ModelMap& models() const noexcept { return models_; }
  /// Extra connection for scripts and tests.
  bus::Connection& control() { return *control_; }

  /// Every bus service, in tick order.
  [[nodiscard]] std::vector<bus::Service*> services();

 private:
  void tick_all();

  ConnectionFactory connect_;
  Options options_;
  std::string ws_id_;
  scene::ModelMap models_;
  std::unique_ptr<authoring::AuthoringService> authoring_;
  std::unique_ptr<conditions::ConditionService> engine_;
  std::unique_ptr<assembly::AssemblyService> assembly_;
  std::map<std::string, std::unique_ptr<robot::RobotAdapterService>> robots_;
  std::unique_ptr<preview::PreviewService> preview_;
  std::vector<std::unique_ptr<scene::SceneClient>> clients_;
  std::unique_ptr<bus::Connection> control_;
  std::int64_t now_ = 0;
  bool running_ = false;
};

}  // namespace arthur::runtime
