#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arthur/bus/service.hpp"
#include "arthur/robot/sim.hpp"

namespace arthur::robot {

inline constexpr std::int64_t kPollIntervalMs = 500;
inline constexpr std::int64_t kRpcTimeoutMs = 1000;
inline constexpr std::int64_t kMaxBackoffMs = 8000;

/**
 * Robot adapter around the simulator. Publishes one retained state sample
 * per period on robot/<agent>/state, polls the assembly service for the next
 * task while playing and past the acknowledge gate, runs the task program and
 * reports completion. Unanswered assembly requests are retried with doubling
 * back-off and show up as "assembly": "unreachable" in the heartbeat.
 *
 * Handles robot-play-pause, robot-acknowledge and robot-move-mode addressed
 * to this agent plus global-play-pause; revoke notices drop the current task.
 * Requests on rpc/robot/<agent>: state, play_pause, acknowledge, move_mode,
 * stop, poll_next_task, update_progress.
 */
class RobotAdapterService : public bus::Service {
 public:
  static constexpr const char* kName = "robot-sim";

  RobotAdapterService(std::unique_ptr<bus::Connection> connection, std::string workstation_id, std::string agent,
                      RobotModel model, SimOptions options = {}, JointVector home = {});

  void start(std::int64_t now_ms) override;

  json handle(const std::string& op, const json& args);

  [[nodiscard]] const RobotSim& sim() const noexcept { return sim_; }
  [[nodiscard]] const std::string& agent() const noexcept { return agent_; }
  [[nodiscard]] const std::optional<RobotState>& last_sample() const noexcept { return last_; }
  [[nodiscard]] const std::vector<std::string>& diagnostics_log() const noexcept { return log_; }

 private:
  struct Outstanding {
    std::string id;
    std::string op;
    json args;
    std::int64_t sent_ms = 0;
  };

  void on_tick(std::int64_t now_ms) override;
  void on_action(const bus::Envelope& e);
  void on_dispatch(const bus::Envelope& e);
  void send(const std::string& op, json args);
  void on_response(const json& response);
  void publish_sample(std::int64_t timestamp_ms);
  json status_detail() const override;

  std::string agent_;
  RobotSim sim_;
  std::unique_ptr<bus::RpcClient> assembly_;
  std::optional<Outstanding> outstanding_;
  std::vector<std::string> completions_;  // finished tasks not yet acknowledged by assembly
  std::int64_t next_sample_ms_ = 0;
  std::int64_t next_poll_ms_ = 0;
  std::int64_t backoff_ms_ = kRpcTimeoutMs;
  int failures_ = 0;
  std::optional<RobotState> last_;
  std::vector<std::string> log_;
};

}  // namespace arthur::robot
