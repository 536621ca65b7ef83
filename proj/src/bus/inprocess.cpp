#include "arthur/bus/inprocess.hpp"

#include <map>
#include <mutex>

#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"

namespace arthur::bus {

class InProcessConnection;

struct InProcessBroker::State {
  std::recursive_mutex mutex;
  bool available = true;
  std::uint64_t sessions = 0;
  std::map<std::string, Envelope> retained;
  std::vector<InProcessConnection*> connections;
};

class InProcessConnection final : public Connection {
 public:
  InProcessConnection(std::shared_ptr<InProcessBroker::State> state, std::string client_id, std::size_t capacity)
      : Connection(client_id, capacity), state_(std::move(state)) {
    std::lock_guard lock(state_->mutex);
    session_ = client_id + "#" + std::to_string(++state_->sessions);
    state_->connections.push_back(this);
  }

  ~InProcessConnection() override {
    std::lock_guard lock(state_->mutex);
    std::erase(state_->connections, this);
  }

  void deliver(const Envelope& e) {
    for (const auto& [id, filter] : filters_) {
      if (topic_matches(filter, e.topic)) {
        enqueue(e);
        return;
      }
    }
  }

 protected:
  std::string session_id() const override { return session_; }

  void send_publish(const Envelope& e) override {
    std::lock_guard lock(state_->mutex);
    check_available();
    if (e.retained) {
      if (e.payload.is_null()) {
        state_->retained.erase(e.topic);
      } else {
        state_->retained[e.topic] = e;
      }
    }
    // Live deliveries carry retained=false, as on an MQTT broker.
    Envelope live = e;
    live.retained = false;
    for (auto* c : state_->connections) c->deliver(live);
  }

  void send_subscribe(SubscriptionId id, const std::string& filter) override {
    std::lock_guard lock(state_->mutex);
    check_available();
    filters_[id] = filter;
    for (const auto& [topic, e] : state_->retained) {
      if (topic_matches(filter, topic)) enqueue(e, id);
    }
  }

  void send_unsubscribe(const std::string& filter, bool last_for_filter) override {
    std::lock_guard lock(state_->mutex);
    if (last_for_filter) {
      std::erase_if(filters_, [&](const auto& kv) { return kv.second == filter; });
      return;
    }
    for (auto it = filters_.begin(); it != filters_.end(); ++it) {
      if (it->second == filter) {
        filters_.erase(it);
        return;
      }
    }
  }

 private:
  void check_available() const {
    if (!state_->available) {
      throw Error(ErrorCode::transport, "in-process broker unavailable; retry after 500 ms");
    }
  }

  std::shared_ptr<InProcessBroker::State> state_;
  std::string session_;
  std::map<SubscriptionId, std::string> filters_;
};

InProcessBroker::InProcessBroker() : state_(std::make_shared<State>()) {}
InProcessBroker::~InProcessBroker() = default;

std::unique_ptr<Connection> InProcessBroker::connect(std::string client_id, std::size_t queue_capacity) {
  return std::make_unique<InProcessConnection>(state_, std::move(client_id), queue_capacity);
}

void InProcessBroker::set_available(bool available) {
  std::lock_guard lock(state_->mutex);
  state_->available = available;
}

std::vector<Envelope> InProcessBroker::retained(std::string_view filter) const {
  std::lock_guard lock(state_->mutex);
  std::vector<Envelope> out;
  for (const auto& [topic, e] : state_->retained) {
    if (topic_matches(filter, topic)) out.push_back(e);
  }
  return out;
}

}  // namespace arthur::bus
