#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arthur/robot/kinematics.hpp"

namespace arthur::robot {

/// Program state; move_mode is published as run_state "paused" with the move_mode flag.
enum class Mode { stopped, playing, paused, move_mode };

std::string_view to_string(Mode m);

struct SimOptions {
  int rate_hz = 10;          // samples per second, 1..125
  bool require_ack = true;   // wait for robot-acknowledge before each task
};

/**
 * Simulated 6-joint robot advanced in fixed sample periods.
 *
 * Allowed mode changes: stopped <-> playing, playing <-> paused,
 * playing/paused -> move_mode -> paused. Motion is joint-space linear between
 * program waypoints; all joints arrive together and no joint exceeds its
 * speed limit over one period. Each waypoint is reached exactly, so pausing
 * never changes where a program ends.
 *
 * While a task runs, sample k carries value k of each sensor profile. A task
 * finishes once the program is done and every profile has been played.
 */
class RobotSim {
 public:
  explicit RobotSim(RobotModel model, SimOptions options = {}, JointVector home = {});

  [[nodiscard]] Mode mode() const noexcept { return mode_; }
  [[nodiscard]] const JointVector& q() const noexcept { return q_; }
  [[nodiscard]] const RobotModel& model() const noexcept { return model_; }
  [[nodiscard]] std::int64_t period_ms() const noexcept { return 1000 / options_.rate_hz; }

  // Commands return false when they do not apply in the current mode.
  bool play_pause();
  bool acknowledge();
  bool toggle_move_mode();
  bool stop();

  [[nodiscard]] const std::string& task() const noexcept { return task_; }
  /// Playing, idle and past the acknowledge gate.
  [[nodiscard]] bool ready_for_task() const;
  [[nodiscard]] bool waiting_for_ack() const;
  /// Throws Error(invalid_argument) for non-finite or out-of-limit waypoints.
  void start_task(const Task& task);
  /// Drops the current task without completing it.
  void abort_task();
  /// Finishes the current task now (external progress report).
  void finish_task();
  /// Task finished since the last call.
  std::optional<std::string> take_finished();

  /// Advances one period and returns the sample stamped `timestamp_ms`.
  RobotState step(std::int64_t timestamp_ms);

 private:
  [[nodiscard]] double progress() const;
  void advance();

  RobotModel model_;
  SimOptions options_;
  Mode mode_ = Mode::stopped;
  JointVector q_;
  bool ack_granted_ = false;
  bool moving_ = false;
  std::string task_;
  std::vector<JointVector> waypoints_;
  std::size_t next_waypoint_ = 0;
  std::map<std::string, std::vector<double>> profile_;
  std::size_t profile_length_ = 0;
  std::int64_t task_sample_ = -1;
  std::map<std::string, double> sensors_;
  std::optional<std::string> finished_;
};

}  // namespace arthur::robot
