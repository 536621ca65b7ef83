#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arthur/core/model.hpp"

namespace arthur::preview {

struct RecordedSample {
  std::int64_t timestamp_ms = 0;
  JointVector q{};
  Pose tcp;
};

struct Recording {
  std::string agent;
  std::string task;
  std::uint64_t revision = 0;
  std::int64_t active_ms = 0;
  std::int64_t completed_ms = 0;
  std::vector<RecordedSample> samples;
};

json to_json(const Recording& r);
Recording recording_from_json(const json& j);

/**
 * Cuts robot state streams into per-(agent, task) recordings. A sample joins
 * the buffer of (agent, sample.task) when that task is active for the agent
 * and the sample is not older than the activation. Completion stores the
 * buffer, trimmed to the completion time, as the next revision; an empty
 * buffer is discarded with a diagnostic.
 */
class Recorder {
 public:
  /// Returns the stored recording, if the completion produced one.
  std::optional<Recording> on_task_status(const std::string& task, TaskStatus status, const std::string& agent,
                                          std::int64_t timestamp_ms);
  void on_robot_sample(const std::string& agent, const RobotState& s);

  [[nodiscard]] const Recording* get(const std::string& agent, const std::string& task) const;
  [[nodiscard]] const std::map<std::pair<std::string, std::string>, Recording>& recordings() const noexcept {
    return stored_;
  }
  /// Adds a recording loaded from disk.
  void adopt(Recording r);

  [[nodiscard]] const std::vector<std::string>& diagnostics_log() const noexcept { return log_; }

 private:
  struct Active {
    std::string agent;
    std::int64_t since_ms = 0;
    std::vector<RecordedSample> samples;
  };

  std::map<std::string, Active> active_;  // by task
  std::map<std::string, TaskStatus> last_status_;
  std::set<std::string> robots_;          // agents seen on the state stream
  std::map<std::pair<std::string, std::string>, Recording> stored_;
  std::vector<std::string> log_;
};

/// One file per recording: <dir>/<agent>/<task>.json in canonical JSON.
std::filesystem::path recording_path(const std::filesystem::path& dir, const std::string& agent, const std::string& task);

}  // namespace arthur::preview
