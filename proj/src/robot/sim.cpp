#include "arthur/robot/sim.hpp"

#include <algorithm>
#include <cmath>

#include "arthur/core/error.hpp"

namespace arthur::robot {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::stopped: return "stopped";
    case Mode::playing: return "playing";
    case Mode::paused: return "paused";
    case Mode::move_mode: return "move-mode";
  }
  return "?";
}

RobotSim::RobotSim(RobotModel model, SimOptions options, JointVector home)
    : model_(std::move(model)), options_(options), q_(home) {
  if (options_.rate_hz < 1 || options_.rate_hz > 125) {
    throw Error(ErrorCode::invalid_argument, "sample rate must be within 1..125 Hz");
  }
  (void)fk(model_, q_);
}

bool RobotSim::play_pause() {
  switch (mode_) {
    case Mode::stopped:
    case Mode::paused:
      mode_ = Mode::playing;
      return true;
    case Mode::playing:
      mode_ = Mode::paused;
      return true;
    case Mode::move_mode:
      mode_ = Mode::paused;
      return true;
  }
  return false;
}

bool RobotSim::toggle_move_mode() {
  if (mode_ == Mode::stopped) return false;
  mode_ = mode_ == Mode::move_mode ? Mode::paused : Mode::move_mode;
  return true;
}

bool RobotSim::stop() {
  if (mode_ != Mode::playing) return false;
  mode_ = Mode::stopped;
  return true;
}

bool RobotSim::waiting_for_ack() const {
  return options_.require_ack && mode_ == Mode::playing && task_.empty() && !ack_granted_;
}

bool RobotSim::acknowledge() {
  if (!waiting_for_ack()) return false;
  ack_granted_ = true;
  return true;
}

bool RobotSim::ready_for_task() const {
  return mode_ == Mode::playing && task_.empty() && (ack_granted_ || !options_.require_ack);
}

void RobotSim::start_task(const Task& task) {
  for (const auto& w : task.program) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      const auto& r = model_.joints[i];
      if (!std::isfinite(w[i]) || w[i] < r.q_min || w[i] > r.q_max) {
        throw Error(ErrorCode::invalid_argument, "task '" + task.id + "' waypoint joint " + std::to_string(i) + " outside limits");
      }
    }
  }
  task_ = task.id;
  waypoints_ = task.program;
  next_waypoint_ = 0;
  profile_ = task.sensor_profile;
  profile_length_ = 0;
  for (const auto& [name, values] : profile_) profile_length_ = std::max(profile_length_, values.size());
  task_sample_ = -1;
  ack_granted_ = false;
}

void RobotSim::abort_task() {
  for (const auto& [name, values] : profile_) sensors_.erase(name);
  task_.clear();
  waypoints_.clear();
  profile_.clear();
  profile_length_ = 0;
  task_sample_ = -1;
}

void RobotSim::finish_task() {
  if (task_.empty()) return;
  finished_ = task_;
  abort_task();
}

std::optional<std::string> RobotSim::take_finished() { return std::exchange(finished_, std::nullopt); }

void RobotSim::advance() {
  moving_ = false;
  if (next_waypoint_ >= waypoints_.size()) return;
  const auto& target = waypoints_[next_waypoint_];
  const double dt = static_cast<double>(period_ms()) / 1000.0;
  double needed = 0;  // seconds for the slowest joint
  for (std::size_t i = 0; i < q_.size(); ++i) {
    needed = std::max(needed, std::abs(target[i] - q_[i]) / model_.joints[i].max_speed);
  }
  if (needed <= dt) {
    moving_ = needed > 0;
    q_ = target;
    ++next_waypoint_;
    return;
  }
  const double f = dt / needed;
  for (std::size_t i = 0; i < q_.size(); ++i) q_[i] += (target[i] - q_[i]) * f;
  moving_ = true;
}

double RobotSim::progress() const {
  if (task_.empty()) return 0.0;
  double p = 1.0;
  if (!waypoints_.empty()) p = std::min(p, static_cast<double>(next_waypoint_) / static_cast<double>(waypoints_.size()));
  if (profile_length_ > 0) {
    p = std::min(p, static_cast<double>(task_sample_ + 1) / static_cast<double>(profile_length_));
  }
  return p;
}

RobotState RobotSim::step(std::int64_t timestamp_ms) {
  moving_ = false;
  if (mode_ == Mode::playing && !task_.empty()) {
    ++task_sample_;
    advance();
    for (const auto& [name, values] : profile_) {
      if (!values.empty()) sensors_[name] = values[std::min<std::size_t>(task_sample_, values.size() - 1)];
    }
  }
  RobotState s;
  s.timestamp_ms = timestamp_ms;
  s.q = q_;
  s.tcp = fk(model_, q_);
  s.run_state = mode_ == Mode::playing ? RunState::playing : mode_ == Mode::stopped ? RunState::stopped : RunState::paused;
  s.moving = moving_;
  s.move_mode = mode_ == Mode::move_mode;
  s.waiting_for_ack = waiting_for_ack();
  s.assistance = s.waiting_for_ack;
  s.task = task_;
  s.progress = progress();
  s.task_sample = task_.empty() ? -1 : task_sample_;
  s.sensors = sensors_;
  const bool program_done = next_waypoint_ >= waypoints_.size();
  const bool profile_done = static_cast<std::size_t>(task_sample_ + 1) >= profile_length_;
  if (!task_.empty() && task_sample_ >= 0 && program_done && profile_done) {
    s.progress = 1.0;
    finish_task();
  }
  return s;
}

}  // namespace arthur::robot
