#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "arthur/bus/connection.hpp"
#include "arthur/core/model.hpp"

namespace arthur::bus {

/// Payload of `user/body`: {"head": pose|null, "hand_left": ..., "hand_right": ..., "timestamp_ms"}.
json body_to_json(const std::map<BodyPart, Pose>& body, std::int64_t timestamp_ms);

/**
 * Folds the live topics of one workstation (robot state, user body, task
 * status, input events, zones, selected message topics) into a WorldState.
 * Input events and messages older than `retention_ms` are pruned by set_now().
 */
class WorldMirror {
 public:
  explicit WorldMirror(std::string workstation_id, std::int64_t retention_ms = 60000);

  /// Subscribes the fixed live topics on `connection`.
  void attach(Connection& connection);
  /// Keeps exactly `filters` subscribed for message tracking.
  void track_messages(Connection& connection, const std::set<std::string>& filters);

  void set_now(std::int64_t now_ms);
  /// Returns true when the envelope changed the world.
  bool apply(const Envelope& e);

  [[nodiscard]] const WorldState& world() const noexcept { return world_; }
  [[nodiscard]] std::uint64_t changes() const noexcept { return changes_; }
  /// Latest progress summary from the assembly service, null before the first.
  [[nodiscard]] const json& progress() const noexcept { return progress_; }

 private:
  void record_message(const Envelope& e);

  std::string ws_;
  std::string root_;
  std::int64_t retention_ms_;
  WorldState world_;
  json progress_;
  std::uint64_t changes_ = 0;
  std::map<std::string, SubscriptionId> message_subs_;
};

}  // namespace arthur::bus
