#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "arthur/authoring/authoring.hpp"
#include "arthur/bus/service.hpp"

namespace arthur::authoring {

/**
 * Bus face of the authoring model. Every commit is mirrored to the retained
 * config topics (changed entities, cleared topics plus a tombstone for
 * removed ones, then config/meta). Requests arrive on rpc/authoring.
 *
 * It also carries out the workstation-wide actions (send-mqtt-message,
 * toggle-feedback, acknowledge) so that several scene clients never repeat
 * the side effect.
 */
class AuthoringService : public bus::Service {
 public:
  static constexpr const char* kName = "authoring";

  AuthoringService(std::unique_ptr<bus::Connection> connection, Authoring model, std::uint64_t seed = 1);

  void start(std::int64_t now_ms) override;

  [[nodiscard]] const Authoring& model() const noexcept { return model_; }

  /// Request dispatch; also the in-process entry point. Throws arthur::Error.
  json handle(const std::string& op, const json& args);

  [[nodiscard]] const std::vector<json>& acknowledgments() const noexcept { return acknowledgments_; }
  [[nodiscard]] const std::vector<std::string>& diagnostics_log() const noexcept { return log_; }

 private:
  void sync();
  void on_action(const bus::Envelope& e);
  json status_detail() const override;

  Authoring model_;
  std::uint64_t seed_;
  std::uint64_t fake_calls_ = 0;
  std::map<std::string, json> published_;
  std::vector<json> acknowledgments_;
  std::vector<std::string> log_;
};

}  // namespace arthur::authoring
