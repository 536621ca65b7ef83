#include "arthur/assembly/graph.hpp"

#include <algorithm>
#include <set>

#include "arthur/core/error.hpp"
#include "arthur/core/validate.hpp"

namespace arthur::assembly {

namespace {

std::string join_cycle(const std::vector<std::string>& ids) {
  std::string s;
  for (const auto& id : ids) s += (s.empty() ? "" : " -> ") + id;
  return s;
}

}  // namespace

TaskGraph::TaskGraph(const Workstation& ws, bool auto_activate_operators) : auto_operators_(auto_activate_operators) {
  if (auto cyc = find_task_cycle(ws.tasks); !cyc.empty()) {
    throw Error(ErrorCode::cycle, "task cycle: " + join_cycle(cyc));
  }
  const auto violations = validate_bop(ws.tasks, ws.parts, ws.tools);
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw Error(ErrorCode::dangling_reference, v.property + ": " + v.message);
  }
  for (const auto& [id, a] : ws.agents) agents_[id] = a.role;
  for (std::size_t i = 0; i < ws.tasks.size(); ++i) {
    const auto& t = ws.tasks[i];
    if (!t.agent.empty() && agents_.count(t.agent) == 0) {
      throw Error(ErrorCode::dangling_reference, "task '" + t.id + "' is assigned to unknown agent '" + t.agent + "'");
    }
    tasks_.push_back({t.id, i, t.predecessors, TaskStatus::pending, t.agent, ""});
  }
  refresh();
}

const TaskState& TaskGraph::task(const std::string& id) const {
  for (const auto& t : tasks_) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::not_found, "no task '" + id + "'");
}

TaskState& TaskGraph::mutable_task(const std::string& id) { return const_cast<TaskState&>(task(id)); }

void TaskGraph::require_agent(const std::string& agent) const {
  if (agents_.count(agent) == 0) throw Error(ErrorCode::unknown_agent, "no agent '" + agent + "'");
}

std::optional<std::string> TaskGraph::active_task(const std::string& agent) const {
  for (const auto& t : tasks_) {
    if (t.status == TaskStatus::active && t.agent == agent) return t.id;
  }
  return std::nullopt;
}

std::optional<std::string> TaskGraph::next_task(const std::string& agent) {
  require_agent(agent);
  if (auto a = active_task(agent)) return a;
  for (auto& t : tasks_) {
    if (t.status == TaskStatus::ready && t.agent == agent) {
      t.status = TaskStatus::active;
      notices_.push_back({"dispatch", t.id, agent});
      return t.id;
    }
  }
  return std::nullopt;
}

void TaskGraph::complete(const std::string& id, const std::string& by) {
  require_agent(by);
  auto& t = mutable_task(id);
  if (t.status == TaskStatus::completed) throw Error(ErrorCode::immutable, "task '" + id + "' is already completed");
  if (t.status == TaskStatus::pending) {
    std::string open;
    for (const auto& p : t.predecessors) {
      if (task(p).status != TaskStatus::completed) open += (open.empty() ? "" : ", ") + p;
    }
    throw Error(ErrorCode::precedence, "task '" + id + "' waits for " + open);
  }
  t.status = TaskStatus::completed;
  t.completed_by = by;
  notices_.push_back({"complete", id, by});
  refresh();
}

void TaskGraph::reassign(const std::string& id, const std::string& agent) {
  require_agent(agent);
  auto& t = mutable_task(id);
  if (t.status == TaskStatus::completed) throw Error(ErrorCode::immutable, "task '" + id + "' is already completed");
  if (t.agent == agent) return;
  if (t.status == TaskStatus::active) {
    notices_.push_back({"revoke", id, t.agent});
    notices_.push_back({"dispatch", id, agent});
  }
  t.agent = agent;
  refresh();
}

void TaskGraph::refresh() {
  std::set<std::string> done;
  for (const auto& t : tasks_) {
    if (t.status == TaskStatus::completed) done.insert(t.id);
  }
  for (auto& t : tasks_) {
    if (t.status != TaskStatus::pending) continue;
    if (std::all_of(t.predecessors.begin(), t.predecessors.end(), [&](const auto& p) { return done.count(p) > 0; })) {
      t.status = TaskStatus::ready;
    }
  }
  if (!auto_operators_) return;
  for (const auto& [id, role] : agents_) {
    if (role == AgentRole::human_operator && !active_task(id)) {
      for (auto& t : tasks_) {
        if (t.status == TaskStatus::ready && t.agent == id) {
          t.status = TaskStatus::active;
          notices_.push_back({"dispatch", t.id, id});
          break;
        }
      }
    }
  }
}

std::size_t TaskGraph::completed() const {
  return static_cast<std::size_t>(
      std::count_if(tasks_.begin(), tasks_.end(), [](const auto& t) { return t.status == TaskStatus::completed; }));
}

double TaskGraph::progress() const {
  return tasks_.empty() ? 1.0 : static_cast<double>(completed()) / static_cast<double>(tasks_.size());
}

json TaskGraph::state_json() const {
  json list = json::array();
  for (const auto& t : tasks_) {
    list.push_back({{"id", t.id}, {"status", to_string(t.status)}, {"agent", t.agent}, {"completed_by", t.completed_by}});
  }
  return {{"tasks", list}};
}

void TaskGraph::restore(const json& state) {
  auto next = tasks_;
  try {
    const auto& list = state.at("tasks");
    if (list.size() != next.size()) throw Error(ErrorCode::load, "state holds " + std::to_string(list.size()) + " tasks, BoP has " + std::to_string(next.size()));
    std::map<std::string, TaskState*> by_id;
    for (auto& t : next) by_id[t.id] = &t;
    for (const auto& j : list) {
      const auto id = j.at("id").get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::load, "state names unknown task '" + id + "'");
      auto status = task_status_from_string(j.at("status").get<std::string>());
      if (!status) throw Error(ErrorCode::load, "task '" + id + "' has a bad status");
      const auto agent = j.at("agent").get<std::string>();
      if (!agent.empty() && agents_.count(agent) == 0) throw Error(ErrorCode::load, "task '" + id + "' names unknown agent '" + agent + "'");
      it->second->status = *status;
      it->second->agent = agent;
      it->second->completed_by = j.value("completed_by", std::string());
    }
    for (const auto& t : next) {
      const bool preds_done = std::all_of(t.predecessors.begin(), t.predecessors.end(),
                                          [&](const auto& p) { return by_id.at(p)->status == TaskStatus::completed; });
      if ((t.status == TaskStatus::pending) == preds_done) {
        throw Error(ErrorCode::load, "task '" + t.id + "' status " + std::string(to_string(t.status)) + " breaks precedence");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::load, std::string("assembly state: ") + e.what());
  }
  tasks_ = std::move(next);
}

std::vector<Notice> TaskGraph::take_notices() { return std::exchange(notices_, {}); }

}  // namespace arthur::assembly
