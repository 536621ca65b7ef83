#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "arthur/bus/connection.hpp"

namespace arthur::bus {

struct BrokerAddress {
  std::string host = "127.0.0.1";
  std::uint16_t port = 1883;

  /// Accepts "mqtt://host:port", "tcp://host:port", "host:port" or "host".
  static BrokerAddress parse(std::string_view url);
  [[nodiscard]] std::string str() const;
};

/// Broker URL from ARTHUR_BROKER, if set.
std::optional<std::string> broker_from_env();

/// Connects to an MQTT 3.1.1 broker (QoS 1, clean session).
/// Throws Error(transport) naming the address when the broker is unreachable.
std::unique_ptr<Connection> connect_mqtt(const BrokerAddress& address, std::string client_id,
                                         std::chrono::milliseconds timeout = std::chrono::seconds(2),
                                         std::size_t queue_capacity = kDefaultQueueCapacity);

/**
 * Small MQTT 3.1.1 broker: QoS 0/1, retained messages, wildcard filters,
 * keepalive. One background thread multiplexes all clients.
 */
class MqttBroker {
 public:
  /// Port 0 picks an ephemeral port; see port().
  explicit MqttBroker(std::uint16_t port = 0, std::string bind_address = "127.0.0.1");
  ~MqttBroker();
  MqttBroker(const MqttBroker&) = delete;
  MqttBroker& operator=(const MqttBroker&) = delete;

  [[nodiscard]] std::uint16_t port() const noexcept { return port_; }
  [[nodiscard]] std::size_t client_count() const;
  void stop();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
  std::uint16_t port_ = 0;
};

}  // namespace arthur::bus
