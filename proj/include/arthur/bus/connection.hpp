#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace arthur::bus {

using json = nlohmann::json;

/**
 * One published message. `sequence` increases by one per publish of a
 * connection; `publisher` identifies the connection session. A null payload
 * with `retained` set clears the retained message for the topic.
 */
struct Envelope {
  std::string topic;
  json payload;
  bool retained = false;
  std::string publisher;
  std::uint64_t sequence = 0;
};

/// Wire form: {"publisher": ..., "seq": ..., "payload": ...}; empty for retained clears.
std::string encode_envelope(const Envelope& e);
Envelope decode_envelope(std::string topic, std::string_view bytes, bool retained);

using Handler = std::function<void(const Envelope&)>;
using SubscriptionId = std::uint64_t;

inline constexpr std::size_t kDefaultQueueCapacity = 1 << 16;

/**
 * Client-side view of a broker. Delivery is pull-based: envelopes are queued
 * by the backend and handed to handlers from `poll()`, on the caller's thread.
 *
 * Each subscription drops envelopes whose (publisher, topic) sequence it has
 * already seen, so retained replays and redeliveries are idempotent.
 */
class Connection {
 public:
  explicit Connection(std::string client_id, std::size_t queue_capacity = kDefaultQueueCapacity);
  virtual ~Connection() = default;
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  [[nodiscard]] const std::string& client_id() const noexcept { return client_id_; }

  /// Throws Error(invalid_argument) for malformed topics, Error(transport) when the backend is down.
  void publish(std::string_view topic, json payload, bool retained = false);
  /// Retained messages matching `filter` are delivered to `handler` first.
  SubscriptionId subscribe(std::string_view filter, Handler handler);
  void unsubscribe(SubscriptionId id);

  /// Delivers queued envelopes; returns how many were handed to at least one handler.
  std::size_t poll();
  [[nodiscard]] std::size_t pending() const;

  /// Number of envelopes dropped because the queue was full.
  [[nodiscard]] std::uint64_t dropped() const;
  [[nodiscard]] bool lagged() const { return dropped() > 0; }

 protected:
  /// Backends call this (possibly from another thread) for every inbound envelope.
  /// `only` restricts delivery to one subscription (retained replay on subscribe).
  void enqueue(Envelope e, SubscriptionId only = 0);

  virtual std::string session_id() const = 0;
  virtual void send_publish(const Envelope& e) = 0;
  virtual void send_subscribe(SubscriptionId id, const std::string& filter) = 0;
  virtual void send_unsubscribe(const std::string& filter, bool last_for_filter) = 0;

 private:
  struct Subscription {
    std::string filter;
    Handler handler;
    std::map<std::pair<std::string, std::string>, std::uint64_t> seen;  // (publisher, topic) -> seq
  };
  struct Queued {
    Envelope envelope;
    SubscriptionId only;
  };

  std::string client_id_;
  std::size_t capacity_;
  std::uint64_t next_sequence_ = 1;
  SubscriptionId next_subscription_ = 1;
  std::map<SubscriptionId, Subscription> subscriptions_;
  mutable std::mutex queue_mutex_;
  std::deque<Queued> queue_;
  std::uint64_t dropped_ = 0;
};

}  // namespace arthur::bus
