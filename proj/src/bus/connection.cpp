#include "arthur/bus/connection.hpp"

#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"

namespace arthur::bus {

std::string encode_envelope(const Envelope& e) {
  if (e.payload.is_null() && e.retained) return {};
  return json{{"publisher", e.publisher}, {"seq", e.sequence}, {"payload", e.payload}}.dump();
}

Envelope decode_envelope(std::string topic, std::string_view bytes, bool retained) {
  Envelope e;
  e.topic = std::move(topic);
  e.retained = retained;
  if (bytes.empty()) return e;
  json j = json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("payload")) {
    // Foreign publisher: the raw document (or string) is the payload.
    e.payload = j.is_discarded() ? json(std::string(bytes)) : j;
    return e;
  }
  e.payload = std::move(j["payload"]);
  e.publisher = j.value("publisher", std::string());
  e.sequence = j.value("seq", std::uint64_t{0});
  return e;
}

Connection::Connection(std::string client_id, std::size_t queue_capacity)
    : client_id_(std::move(client_id)), capacity_(queue_capacity) {}

void Connection::publish(std::string_view topic, json payload, bool retained) {
  if (!valid_topic(topic)) {
    throw Error(ErrorCode::invalid_argument, "malformed topic '" + std::string(topic) + "'");
  }
  if (topic.substr(0, 7) == "arthur/" && !matches_scheme(topic)) {
    throw Error(ErrorCode::invalid_argument, "topic '" + std::string(topic) + "' does not follow the arthur scheme");
  }
  Envelope e;
  e.topic = std::string(topic);
  e.payload = std::move(payload);
  e.retained = retained;
  e.publisher = session_id();
  e.sequence = next_sequence_;
  send_publish(e);
  ++next_sequence_;
}

SubscriptionId Connection::subscribe(std::string_view filter, Handler handler) {
  if (!valid_filter(filter)) {
    throw Error(ErrorCode::invalid_argument, "malformed filter '" + std::string(filter) + "'");
  }
  const SubscriptionId id = next_subscription_++;
  subscriptions_[id] = Subscription{std::string(filter), std::move(handler), {}};
  try {
    send_subscribe(id, std::string(filter));
  } catch (...) {
    subscriptions_.erase(id);
    throw;
  }
  return id;
}

void Connection::unsubscribe(SubscriptionId id) {
  auto it = subscriptions_.find(id);
  if (it == subscriptions_.end()) return;
  const std::string filter = it->second.filter;
  subscriptions_.erase(it);
  bool last = true;
  for (const auto& [sid, s] : subscriptions_) {
    if (s.filter == filter) last = false;
  }
  send_unsubscribe(filter, last);
}

void Connection::enqueue(Envelope e, SubscriptionId only) {
  std::lock_guard lock(queue_mutex_);
  if (queue_.size() >= capacity_) {
    ++dropped_;
    return;
  }
  queue_.push_back({std::move(e), only});
}

std::size_t Connection::pending() const {
  std::lock_guard lock(queue_mutex_);
  return queue_.size();
}

std::uint64_t Connection::dropped() const {
  std::lock_guard lock(queue_mutex_);
  return dropped_;
}

std::size_t Connection::poll() {
  std::deque<Queued> batch;
  {
    std::lock_guard lock(queue_mutex_);
    batch.swap(queue_);
  }
  std::size_t delivered = 0;
  for (auto& item : batch) {
    const Envelope& e = item.envelope;
    bool any = false;
    // Snapshot ids: handlers may subscribe or unsubscribe while running.
    std::vector<SubscriptionId> ids;
    for (const auto& [id, s] : subscriptions_) {
      if ((item.only == 0 || item.only == id) && topic_matches(s.filter, e.topic)) ids.push_back(id);
    }
    for (auto id : ids) {
      auto it = subscriptions_.find(id);
      if (it == subscriptions_.end()) continue;
      if (e.sequence != 0) {
        auto& last = it->second.seen[{e.publisher, e.topic}];
        if (e.sequence <= last) continue;
        last = e.sequence;
      }
      any = true;
      Handler h = it->second.handler;
      h(e);
    }
    if (any) ++delivered;
  }
  return delivered;
}

}  // namespace arthur::bus
