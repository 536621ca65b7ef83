#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arthur/assembly/graph.hpp"
#include "arthur/bus/config_sync.hpp"
#include "arthur/bus/service.hpp"
#include "arthur/core/error.hpp"

namespace arthur::assembly {

/**
 * Bus face of the task graph. Task statuses are retained on task/<id>/status,
 * the summary on assembly/progress; dispatch, revoke, complete and rejected
 * notices go to assembly/dispatch. Requests arrive on rpc/assembly and the
 * complete-task, reassign-task and select-task actions on events/action.
 *
 * With a state file, every change is written through and a restart resumes
 * from it. The BoP is reloaded from the config topics while no task has
 * started; later BoP edits are reported and need a restart.
 */
class AssemblyService : public bus::Service {
 public:
  static constexpr const char* kName = "assembly";

  AssemblyService(std::unique_ptr<bus::Connection> connection, const Workstation& ws,
                  std::optional<std::filesystem::path> state_file = std::nullopt);

  void start(std::int64_t now_ms) override;

  /// Request dispatch; also the in-process entry point. Throws arthur::Error.
  json handle(const std::string& op, const json& args);

  [[nodiscard]] const TaskGraph& graph() const noexcept { return graph_; }
  [[nodiscard]] const std::string& selected() const noexcept { return selected_; }
  [[nodiscard]] const std::vector<std::string>& diagnostics_log() const noexcept { return log_; }

 private:
  void on_action(const bus::Envelope& e);
  void on_config(const bus::Envelope& e);
  void reject(const std::string& kind, const json& props, const Error& err);
  /// Publishes changed statuses, notices and progress; persists the state.
  void publish_changes();
  json task_json(const TaskState& t) const;
  json progress_json() const;
  json status_detail() const override;

  Workstation ws_;
  TaskGraph graph_;
  std::optional<std::filesystem::path> state_file_;
  bus::ConfigMirror config_;
  std::uint64_t config_revision_ = 0;
  std::map<std::string, json> published_;
  json published_progress_;
  std::string selected_;
  std::vector<std::string> log_;
};

/// BoP identity used to decide whether a config change touches the task graph.
json bop_signature(const Workstation& ws);

}  // namespace arthur::assembly
