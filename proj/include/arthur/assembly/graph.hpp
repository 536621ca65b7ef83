#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arthur/core/model.hpp"

namespace arthur::assembly {

struct TaskState {
  std::string id;
  std::size_t order = 0;  // BoP position
  std::vector<std::string> predecessors;
  TaskStatus status = TaskStatus::pending;
  std::string agent;
  std::string completed_by;
};

/// Something the bus should hear about: "dispatch", "revoke" or "complete".
struct Notice {
  std::string type;
  std::string task;
  std::string agent;
};

/**
 * Task bookkeeping for one BoP. Statuses only move forward
 * (pending -> ready -> active -> completed); a task is ready exactly when all
 * predecessors are completed. Dispatch picks the lowest BoP order among the
 * agent's ready tasks. Operator tasks activate on readiness when
 * `auto_activate_operators` is set.
 */
class TaskGraph {
 public:
  /// Throws Error(cycle) naming the cycle, Error(dangling_reference) for unknown parts/tools/agents.
  explicit TaskGraph(const Workstation& ws, bool auto_activate_operators = true);

  [[nodiscard]] const std::vector<TaskState>& tasks() const noexcept { return tasks_; }
  /// Throws Error(not_found).
  [[nodiscard]] const TaskState& task(const std::string& id) const;

  /// Agent's current active task, or the lowest-order ready one which becomes active.
  std::optional<std::string> next_task(const std::string& agent);
  [[nodiscard]] std::optional<std::string> active_task(const std::string& agent) const;

  /// Completes an active or ready task. Throws Error(precedence) for pending tasks and
  /// Error(immutable) for completed ones; state is unchanged on error.
  void complete(const std::string& task, const std::string& by);
  /// Throws Error(immutable) for completed tasks. An active task stays active under the
  /// new agent and the previous agent gets a revoke notice.
  void reassign(const std::string& task, const std::string& agent);

  [[nodiscard]] std::size_t completed() const;
  [[nodiscard]] double progress() const;

  /// Persisted form: {"tasks": [{"id","status","agent","completed_by"}]}.
  [[nodiscard]] json state_json() const;
  /// Throws Error(load) when the ids differ from the BoP or statuses break precedence.
  void restore(const json& state);

  /// Notices since the last call.
  std::vector<Notice> take_notices();

 private:
  TaskState& mutable_task(const std::string& id);
  void require_agent(const std::string& agent) const;
  void refresh();

  std::vector<TaskState> tasks_;
  std::map<std::string, AgentRole> agents_;
  bool auto_operators_;
  std::vector<Notice> notices_;
};

}  // namespace arthur::assembly
