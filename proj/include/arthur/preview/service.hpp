#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "arthur/bus/service.hpp"
#include "arthur/preview/recorder.hpp"

namespace arthur::preview {

/**
 * Records robot trajectories per (agent, task) from robot/+/state and
 * task/+/status and serves them on rpc/preview: `get {agent, task}` returns
 * the latest recording or null, `list` the stored keys with revisions.
 * With a directory, recordings are written there and loaded again on start.
 */
class PreviewService : public bus::Service {
 public:
  static constexpr const char* kName = "preview";

  PreviewService(std::unique_ptr<bus::Connection> connection, std::string workstation_id,
                 std::optional<std::filesystem::path> directory = std::nullopt);

  void start(std::int64_t now_ms) override;

  json handle(const std::string& op, const json& args);

  [[nodiscard]] const Recorder& recorder() const noexcept { return recorder_; }

 private:
  void store(const Recording& r);
  json status_detail() const override;

  Recorder recorder_;
  std::optional<std::filesystem::path> dir_;
};

}  // namespace arthur::preview
