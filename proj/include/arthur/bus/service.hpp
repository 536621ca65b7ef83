#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "arthur/bus/connection.hpp"

namespace arthur::bus {

inline constexpr std::int64_t kHeartbeatPeriodMs = 2000;

/// Request/response envelopes: {"id","client","op","args"} and {"id","ok","result"|"error"}.
json rpc_request(const std::string& id, const std::string& client, const std::string& op, json args);
json rpc_ok(const std::string& id, json result);
json rpc_error(const std::string& id, const std::string& code, const std::string& message);

using RpcHandler = std::function<json(const std::string& op, const json& args)>;

/**
 * Common shell of the long-running services: owns a bus connection, keeps the
 * service clock, publishes a retained heartbeat every two seconds and serves
 * request/response endpoints.
 */
class Service {
 public:
  Service(std::string name, std::string workstation, std::unique_ptr<Connection> connection);
  virtual ~Service() = default;
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const std::string& workstation_id() const noexcept { return ws_; }
  [[nodiscard]] std::int64_t now_ms() const noexcept { return now_ms_; }
  Connection& bus() { return *connection_; }

  virtual void start(std::int64_t now_ms);
  /// Advances the service clock: drains the bus, runs periodic work, heartbeats.
  void tick(std::int64_t now_ms);
  /// Drains queued envelopes without advancing time.
  std::size_t pump();
  virtual void stop();

 protected:
  virtual void on_tick(std::int64_t /*now_ms*/) {}
  /// Extra fields merged into the heartbeat payload.
  virtual json status_detail() const { return json::object(); }
  void serve(const std::string& request_topic, const std::string& response_topic, RpcHandler handler);
  void heartbeat(const std::string& state);

 private:
  std::string name_;
  std::string ws_;
  std::unique_ptr<Connection> connection_;
  std::int64_t now_ms_ = 0;
  std::int64_t last_heartbeat_ms_ = -1;
  bool running_ = false;
};

/// Client half of a request/response endpoint.
class RpcClient {
 public:
  RpcClient(Connection& connection, std::string request_topic, std::string response_topic);

  /// Publishes a request; `done` runs from Connection::poll() when the response arrives.
  std::string call(const std::string& op, json args, std::function<void(const json&)> done = {});
  /// Response for a request id, once received.
  [[nodiscard]] std::optional<json> response(const std::string& id) const;

 private:
  Connection& connection_;
  std::string request_topic_;
  std::uint64_t next_ = 1;
  std::map<std::string, std::function<void(const json&)>> pending_;
  std::map<std::string, json> responses_;
};

}  // namespace arthur::bus
