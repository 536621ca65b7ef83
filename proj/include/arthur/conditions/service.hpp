#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arthur/bus/config_sync.hpp"
#include "arthur/bus/service.hpp"
#include "arthur/bus/world_mirror.hpp"
#include "arthur/conditions/engine.hpp"

namespace arthur::conditions {

inline constexpr std::int64_t kEvaluationPeriodMs = 50;

/**
 * Evaluation loop: mirrors config and live topics, evaluates every 50 ms,
 * publishes edge records on events/condition, firings on events/action and
 * the retained report on conditions/state whenever activation changes.
 */
class ConditionService : public bus::Service {
 public:
  static constexpr const char* kName = "condition-engine";

  ConditionService(std::unique_ptr<bus::Connection> connection, std::string workstation_id);

  void start(std::int64_t now_ms) override;

  [[nodiscard]] const EvaluationReport& last_report() const noexcept { return report_; }
  [[nodiscard]] const std::optional<Workstation>& workstation() const noexcept { return ws_; }
  [[nodiscard]] const std::vector<std::string>& errors() const noexcept { return errors_; }

  /// Evaluates now, regardless of the period.
  void evaluate_now();

 private:
  void on_tick(std::int64_t now_ms) override;
  json status_detail() const override;

  bus::ConfigMirror config_;
  bus::WorldMirror world_;
  bool config_dirty_ = true;
  std::optional<Workstation> ws_;
  EvaluationReport report_;
  json published_state_;
  std::int64_t last_eval_ms_ = -1;
  std::vector<std::string> errors_;
};

/// Retained report payload: {"revision","timestamp_ms","active","invalid"}.
json report_state(const EvaluationReport& r, std::uint64_t revision);

}  // namespace arthur::conditions
