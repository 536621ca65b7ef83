#pragma once

#include <map>
#include <optional>
#include <string>

#include "arthur/bus/connection.hpp"
#include "arthur/core/model.hpp"

namespace arthur::bus {

/**
 * Retained config messages describing `ws` completely: one topic per entity
 * plus `config/meta`. Task payloads carry an extra "order" field so the BoP
 * order survives the per-topic split.
 */
std::map<std::string, json> config_messages(const Workstation& ws);

/// Rebuilds a workstation from the retained config topics of one workstation id.
class ConfigMirror {
 public:
  explicit ConfigMirror(std::string workstation_id);

  /// Filter to subscribe with.
  [[nodiscard]] std::string filter() const;

  /// Applies a config envelope. Returns false for topics outside the config tree.
  bool apply(const Envelope& e);

  /// Last revision announced by config/meta, 0 before the first meta message.
  [[nodiscard]] std::uint64_t revision() const noexcept { return revision_; }

  /// Current reconstruction; empty until meta arrived. Throws Error(load) if inconsistent.
  [[nodiscard]] std::optional<Workstation> workstation() const;

  [[nodiscard]] const std::map<std::string, json>& messages() const noexcept { return messages_; }

 private:
  std::string ws_;
  std::string prefix_;
  std::uint64_t revision_ = 0;
  std::map<std::string, json> messages_;
};

}  // namespace arthur::bus
