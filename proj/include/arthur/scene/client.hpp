#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arthur/bus/config_sync.hpp"
#include "arthur/bus/service.hpp"
#include "arthur/bus/world_mirror.hpp"
#include "arthur/scene/projection.hpp"

namespace arthur::scene {

/**
 * Headless stand-in for the head-mounted display. Mirrors the retained
 * config, the live topics and the engine's conditions/state report, and
 * projects them into scene nodes on every tick. Visibility comes from the
 * engine report, never from a local evaluation, so every client agrees with
 * the engine. Path previews are fetched from rpc/preview when needed.
 *
 * Read-only queries are served on rpc/scene-<name>: dump, nodes, node {id}.
 */
class SceneClient {
 public:
  SceneClient(std::unique_ptr<bus::Connection> connection, std::string workstation_id, std::string name,
              ModelMap models = {});

  void start(std::int64_t now_ms);
  /// Drains the bus, then re-projects the scene at `now_ms`.
  void tick(std::int64_t now_ms);
  /// Drains the bus without advancing time; returns how many envelopes were handled.
  std::size_t pump();

  [[nodiscard]] const std::vector<SceneNode>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const SceneNode* node(const std::string& id) const;
  [[nodiscard]] std::string dump_scene() const { return scene::dump_scene(nodes_); }
  [[nodiscard]] const std::optional<Workstation>& workstation() const noexcept { return ws_; }
  [[nodiscard]] const WorldState& world() const noexcept { return world_.world(); }
  [[nodiscard]] const conditions::EvaluationReport& report() const noexcept { return report_; }
  [[nodiscard]] std::uint64_t report_revision() const noexcept { return report_revision_; }
  [[nodiscard]] std::uint64_t config_revision() const noexcept { return config_.revision(); }

  /// Publishes on events/input; a poke/gaze/pinch at a target that is not a
  /// known feedback is sent with `unresolved` set. Timestamp 0 means now.
  InputEvent inject(InputEvent e);
  void publish_body(const std::map<BodyPart, Pose>& body);

  /// Routes a placement through the authoring service; returns the request id.
  /// Throws Error(immutable) right away for kinds that cannot be re-positioned.
  std::string set_position(const std::string& id, const Pose& pose);
  /// Any authoring request, e.g. update_property; returns the request id.
  std::string request(const std::string& op, json args);
  [[nodiscard]] std::optional<json> response(const std::string& request_id) const;

  /// Firings seen on events/action, in arrival order.
  [[nodiscard]] const std::vector<json>& action_log() const noexcept { return actions_; }
  [[nodiscard]] const std::vector<std::string>& diagnostics_log() const noexcept { return log_; }

  json handle(const std::string& op, const json& args) const;

 private:
  void refresh();
  void request_previews();

  std::unique_ptr<bus::Connection> connection_;
  std::string ws_id_;
  std::string name_;
  ModelMap models_;
  bus::ConfigMirror config_;
  bus::WorldMirror world_;
  bool config_dirty_ = true;
  std::optional<Workstation> ws_;
  conditions::EvaluationReport report_;
  std::uint64_t report_revision_ = 0;
  std::unique_ptr<bus::RpcClient> authoring_;
  std::unique_ptr<bus::RpcClient> preview_;
  PreviewMap previews_;
  std::set<std::pair<std::string, std::string>> requested_;
  std::map<std::string, TaskStatus> seen_status_;
  std::vector<SceneNode> nodes_;
  std::vector<json> actions_;
  std::vector<std::string> log_;
  std::int64_t now_ms_ = 0;
};

}  // namespace arthur::scene
