#pragma once

#include <memory>
#include <string>

#include "arthur/bus/connection.hpp"

namespace arthur::bus {

/**
 * Broker living in the current process. Routing happens synchronously inside
 * publish(), so the global publish order is the delivery order of every
 * connection's queue. Retained messages are replayed on subscribe.
 */
class InProcessBroker {
 public:
  InProcessBroker();
  ~InProcessBroker();

  std::unique_ptr<Connection> connect(std::string client_id, std::size_t queue_capacity = kDefaultQueueCapacity);

  /// Simulates an outage: publishes and subscribes throw Error(transport).
  void set_available(bool available);

  /// Latest retained envelope per topic matching `filter`, ordered by topic.
  [[nodiscard]] std::vector<Envelope> retained(std::string_view filter = "#") const;

  struct State;

 private:
  std::shared_ptr<State> state_;
};

}  // namespace arthur::bus
