#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arthur/core/model.hpp"
#include "arthur/core/registry.hpp"
#include "arthur/core/validate.hpp"

namespace arthur::authoring {

/// Interactive feedback kind -> condition kind created alongside it.
using ImplicitMap = std::map<std::string, std::string>;
ImplicitMap default_implicit_map(const Registry& registry = builtin_registry());

/// Entities other than components that the authoring model edits.
enum class Entity { agent, tracker, anchor, tool, part, task };
std::optional<Entity> entity_from_string(std::string_view s);
std::string_view to_string(Entity e);

struct CreateResult {
  std::string id;
  std::vector<std::string> implicit;  // ids of auto-created conditions
  std::uint64_t revision = 0;
};

struct DeleteResult {
  std::vector<std::string> deleted;  // the component first, then cascaded ones
  std::uint64_t revision = 0;
};

/**
 * Authoritative workstation model. Every mutation works on a copy that must
 * pass the integrity checks before it replaces the current state, so a
 * failed mutation changes nothing, revision included.
 *
 * Explicit components may keep references to deleted components; those are
 * reported by diagnostics() instead of blocking the deletion.
 */
class Authoring {
 public:
  explicit Authoring(Workstation ws, const Registry& registry = builtin_registry(),
                     ImplicitMap implicit = default_implicit_map());

  /// Loads the store and keeps saving every commit back to it.
  static Authoring open(const std::filesystem::path& store, const Registry& registry = builtin_registry());
  void persist_to(std::filesystem::path store);

  [[nodiscard]] const Workstation& workstation() const noexcept { return ws_; }
  [[nodiscard]] std::uint64_t revision() const noexcept { return ws_.revision; }
  [[nodiscard]] const Registry& registry() const noexcept { return *registry_; }

  CreateResult create_component(const std::string& kind, json properties, std::optional<std::string> id = {},
                                std::optional<std::string> visibility = {});
  std::uint64_t update_property(const std::string& id, const std::string& name, json value);
  std::uint64_t set_visibility(const std::string& id, std::optional<std::string> condition);
  std::uint64_t set_enabled(const std::string& id, bool enabled);
  DeleteResult delete_component(const std::string& id);

  /// Adds or replaces; new tasks are appended to the BoP. Trackers get their root anchor.
  std::uint64_t upsert(Entity entity, const json& value);
  std::uint64_t remove(Entity entity, const std::string& id);

  std::uint64_t set_phase(Phase phase);
  /// Refinement only. Anchors move their local pose; positionable feedback its pose property.
  std::uint64_t set_position(const std::string& id, const Pose& pose);

  /// Components whose references dangle, with a description per component.
  [[nodiscard]] std::map<std::string, std::string> diagnostics() const;

 private:
  template <typename F>
  std::uint64_t commit(bool structural, F&& mutate);
  void require_structural() const;
  std::string fresh_id(Workstation& ws, const std::string& base) const;

  Workstation ws_;
  const Registry* registry_;
  ImplicitMap implicit_;
  std::optional<std::filesystem::path> store_;
};

/// Ids usable as a topic level.
bool valid_id(std::string_view id);

}  // namespace arthur::authoring
