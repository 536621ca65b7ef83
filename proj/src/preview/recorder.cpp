#include "arthur/preview/recorder.hpp"

#include "arthur/core/error.hpp"

namespace arthur::preview {

json to_json(const Recording& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"timestamp_ms", s.timestamp_ms}, {"q", s.q}, {"tcp", pose_to_json(s.tcp)}});
  }
  return {{"agent", r.agent},           {"task", r.task},
          {"revision", r.revision},     {"active_ms", r.active_ms},
          {"completed_ms", r.completed_ms}, {"samples", std::move(samples)}};
}

Recording recording_from_json(const json& j) {
  try {
    Recording r;
    r.agent = j.at("agent").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.revision = j.at("revision").get<std::uint64_t>();
    r.active_ms = j.at("active_ms").get<std::int64_t>();
    r.completed_ms = j.at("completed_ms").get<std::int64_t>();
    for (const auto& s : j.at("samples")) {
      r.samples.push_back({s.at("timestamp_ms").get<std::int64_t>(), s.at("q").get<JointVector>(), pose_from_json(s.at("tcp"))});
    }
    for (std::size_t i = 1; i < r.samples.size(); ++i) {
      if (r.samples[i].timestamp_ms <= r.samples[i - 1].timestamp_ms) {
        throw Error(ErrorCode::load, "recording timestamps must increase (sample " + std::to_string(i) + ")");
      }
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::load, std::string("recording: ") + e.what());
  }
}

std::filesystem::path recording_path(const std::filesystem::path& dir, const std::string& agent, const std::string& task) {
  return dir / agent / (task + ".json");
}

std::optional<Recording> Recorder::on_task_status(const std::string& task, TaskStatus status, const std::string& agent,
                                                  std::int64_t timestamp_ms) {
  auto prev = last_status_.find(task);
  const bool changed = prev == last_status_.end() || prev->second != status;
  last_status_[task] = status;
  if (status == TaskStatus::active) {
    auto it = active_.find(task);
    if (it == active_.end() || it->second.agent != agent) active_[task] = {agent, timestamp_ms, {}};
    return std::nullopt;
  }
  if (status != TaskStatus::completed || !changed) {
    if (status != TaskStatus::completed) active_.erase(task);
    return std::nullopt;
  }
  auto it = active_.find(task);
  if (it == active_.end()) return std::nullopt;
  auto run = std::move(it->second);
  active_.erase(it);
  while (!run.samples.empty() && run.samples.back().timestamp_ms > timestamp_ms) run.samples.pop_back();
  if (run.samples.empty()) {
    if (robots_.count(run.agent) > 0) log_.push_back("task " + task + " by " + run.agent + " completed without samples; nothing recorded");
    return std::nullopt;
  }
  auto& slot = stored_[{run.agent, task}];
  Recording r{run.agent, task, slot.revision + 1, run.since_ms, timestamp_ms, std::move(run.samples)};
  slot = r;
  return r;
}

void Recorder::on_robot_sample(const std::string& agent, const RobotState& s) {
  robots_.insert(agent);
  if (s.task.empty()) return;
  auto it = active_.find(s.task);
  if (it == active_.end() || it->second.agent != agent || s.timestamp_ms < it->second.since_ms) return;
  auto& samples = it->second.samples;
  if (!samples.empty() && s.timestamp_ms <= samples.back().timestamp_ms) return;
  samples.push_back({s.timestamp_ms, s.q, s.tcp});
}

const Recording* Recorder::get(const std::string& agent, const std::string& task) const {
  auto it = stored_.find({agent, task});
  return it == stored_.end() ? nullptr : &it->second;
}

void Recorder::adopt(Recording r) {
  auto key = std::make_pair(r.agent, r.task);
  stored_[key] = std::move(r);
}

}  // namespace arthur::preview
