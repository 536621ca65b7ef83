#include "arthur/conditions/service.hpp"

#include <set>

#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"

namespace arthur::conditions {

json report_state(const EvaluationReport& r, std::uint64_t revision) {
  return {{"revision", revision}, {"timestamp_ms", r.timestamp_ms}, {"active", r.active}, {"invalid", r.invalid}};
}

ConditionService::ConditionService(std::unique_ptr<bus::Connection> connection, std::string workstation_id)
    : Service(kName, workstation_id, std::move(connection)), config_(workstation_id), world_(workstation_id) {}

void ConditionService::start(std::int64_t now_ms) {
  bus().subscribe(config_.filter(), [this](const bus::Envelope& e) {
    if (config_.apply(e)) config_dirty_ = true;
  });
  world_.attach(bus());
  Service::start(now_ms);
}

void ConditionService::on_tick(std::int64_t now_ms) {
  if (last_eval_ms_ >= 0 && now_ms - last_eval_ms_ < kEvaluationPeriodMs) return;
  evaluate_now();
}

void ConditionService::evaluate_now() {
  const auto now = now_ms();
  last_eval_ms_ = now;
  if (config_dirty_) {
    config_dirty_ = false;
    try {
      ws_ = config_.workstation();
    } catch (const Error& e) {
      errors_.push_back(std::string("config: ") + e.what());
    }
    if (ws_) {
      std::set<std::string> filters;
      for (const auto& [id, d] : ws_->components) {
        if (d.kind == "message-received" && d.properties.contains("topic") && d.properties["topic"].is_string()) {
          filters.insert(d.properties["topic"].get<std::string>());
        }
      }
      world_.track_messages(bus(), filters);
    }
  }
  if (!ws_) return;
  world_.set_now(now);
  EvaluationReport next;
  try {
    next = evaluate_all(*ws_, world_.world(), &report_);
  } catch (const Error& e) {
    if (errors_.empty() || errors_.back() != e.what()) errors_.push_back(e.what());
    return;
  }
  const auto& ws = workstation_id();
  for (const auto& edge : next.edges) {
    bus().publish(bus::topics::condition_events(ws),
                  {{"condition", edge.condition}, {"edge", edge.rising ? "rising" : "falling"}, {"timestamp_ms", now}});
  }
  for (const auto& f : next.fired) bus().publish(bus::topics::action_events(ws), to_json(f));
  auto state = report_state(next, ws_->revision);
  auto comparable = state;
  comparable.erase("timestamp_ms");
  if (comparable != published_state_) {
    bus().publish(bus::topics::condition_report(ws), std::move(state), true);
    published_state_ = std::move(comparable);
  }
  report_ = std::move(next);
}

json ConditionService::status_detail() const {
  return {{"conditions", report_.active.size()}, {"errors", errors_.size()}};
}

}  // namespace arthur::conditions
