#include "arthur/bus/mqtt.hpp"

#include <poll.h>
#include <sys/socket.h>

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <random>
#include <set>

#include "arthur/bus/mqtt_codec.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"
#include "socket.hpp"

namespace arthur::bus {

using namespace std::chrono_literals;

BrokerAddress BrokerAddress::parse(std::string_view url) {
  BrokerAddress a;
  std::string_view rest = url;
  if (auto pos = rest.find("://"); pos != std::string_view::npos) rest = rest.substr(pos + 3);
  if (auto slash = rest.find('/'); slash != std::string_view::npos) rest = rest.substr(0, slash);
  if (auto colon = rest.rfind(':'); colon != std::string_view::npos) {
    a.host = std::string(rest.substr(0, colon));
    const std::string port(rest.substr(colon + 1));
    char* end = nullptr;
    const long p = std::strtol(port.c_str(), &end, 10);
    if (port.empty() || *end != '\0' || p <= 0 || p > 65535) {
      throw Error(ErrorCode::invalid_argument, "invalid broker port in '" + std::string(url) + "'");
    }
    a.port = static_cast<std::uint16_t>(p);
  } else {
    a.host = std::string(rest);
  }
  if (a.host.empty()) throw Error(ErrorCode::invalid_argument, "invalid broker address '" + std::string(url) + "'");
  return a;
}

std::string BrokerAddress::str() const { return "mqtt://" + host + ":" + std::to_string(port); }

std::optional<std::string> broker_from_env() {
  if (const char* v = std::getenv("ARTHUR_BROKER"); v != nullptr && *v != '\0') return std::string(v);
  return std::nullopt;
}

// --- client -----------------------------------------------------------------

namespace {

constexpr std::uint16_t kKeepaliveSeconds = 30;

class MqttConnection final : public Connection {
 public:
  MqttConnection(const BrokerAddress& address, std::string client_id, std::chrono::milliseconds timeout,
                 std::size_t capacity)
      : Connection(client_id, capacity), address_(address), timeout_(timeout) {
    std::random_device rd;
    session_ = client_id + "#" + std::to_string(rd()) + std::to_string(rd());
    socket_ = net::connect_tcp(address.host, address.port, static_cast<int>(timeout.count()));
    write(mqtt::encode_connect({client_id, kKeepaliveSeconds, true}));
    reader_ = std::thread([this] { read_loop(); });
    std::unique_lock lock(mutex_);
    if (!cv_.wait_for(lock, timeout_, [&] { return connack_.has_value() || closed_; }) || closed_ ||
        *connack_ != 0) {
      lock.unlock();
      shutdown();
      throw Error(ErrorCode::transport, "broker " + address_.str() + " refused or did not answer CONNECT");
    }
  }

  ~MqttConnection() override {
    if (!closed_) write(mqtt::encode_empty(mqtt::PacketType::disconnect));
    shutdown();
  }

 protected:
  std::string session_id() const override { return session_; }

  void send_publish(const Envelope& e) override {
    mqtt::Publish p;
    p.topic = e.topic;
    p.payload = encode_envelope(e);
    p.qos = 1;
    p.retain = e.retained;
    p.packet_id = next_packet_id();
    write_or_throw(mqtt::encode_publish(p));
  }

  void send_subscribe(SubscriptionId id, const std::string& filter) override {
    const auto pid = next_packet_id();
    {
      std::lock_guard lock(mutex_);
      pending_subscribe_[pid] = id;
    }
    write_or_throw(mqtt::encode_subscribe({pid, {{filter, 1}}}));
    std::unique_lock lock(mutex_);
    if (!cv_.wait_for(lock, timeout_, [&] { return acked_.count(pid) > 0 || closed_; }) || closed_) {
      throw Error(ErrorCode::transport, "no SUBACK from " + address_.str() + "; retry after reconnect");
    }
    acked_.erase(pid);
  }

  void send_unsubscribe(const std::string& filter, bool last_for_filter) override {
    if (!last_for_filter) return;
    write_or_throw(mqtt::encode_unsubscribe(next_packet_id(), {filter}));
  }

 private:
  std::uint16_t next_packet_id() {
    std::lock_guard lock(mutex_);
    if (++packet_id_ == 0) packet_id_ = 1;
    return packet_id_;
  }

  bool write(const std::string& bytes) {
    std::lock_guard lock(write_mutex_);
    return socket_.valid() && net::send_all(socket_.fd(), bytes);
  }

  void write_or_throw(const std::string& bytes) {
    if (closed_ || !write(bytes)) {
      throw Error(ErrorCode::transport, "connection to " + address_.str() + " lost; retry after reconnect");
    }
  }

  void shutdown() {
    stop_ = true;
    socket_.shutdown();
    if (reader_.joinable()) reader_.join();
    socket_.close();
  }

  void read_loop() {
    std::string buffer;
    auto last_ping = std::chrono::steady_clock::now();
    while (!stop_) {
      pollfd pfd{socket_.fd(), POLLIN, 0};
      const int rc = ::poll(&pfd, 1, 50);
      if (rc > 0) {
        if (!net::read_available(socket_.fd(), buffer)) break;
        try {
          while (auto packet = mqtt::extract_packet(buffer)) handle(*packet);
        } catch (const Error&) {
          break;
        }
      }
      const auto now = std::chrono::steady_clock::now();
      if (now - last_ping > std::chrono::seconds(kKeepaliveSeconds / 2)) {
        write(mqtt::encode_empty(mqtt::PacketType::pingreq));
        last_ping = now;
      }
    }
    std::lock_guard lock(mutex_);
    closed_ = true;
    cv_.notify_all();
  }

  void handle(const mqtt::Packet& p) {
    switch (p.type) {
      case mqtt::PacketType::connack: {
        std::lock_guard lock(mutex_);
        connack_ = mqtt::decode_connack(p);
        cv_.notify_all();
        break;
      }
      case mqtt::PacketType::publish: {
        auto pub = mqtt::decode_publish(p);
        if (pub.qos == 1) write(mqtt::encode_puback(pub.packet_id));
        try {
          enqueue(decode_envelope(pub.topic, pub.payload, pub.retain));
        } catch (const std::exception&) {
          // Undecodable payloads are dropped.
        }
        break;
      }
      case mqtt::PacketType::suback: {
        std::lock_guard lock(mutex_);
        acked_.insert(mqtt::decode_packet_id(p));
        cv_.notify_all();
        break;
      }
      default: break;
    }
  }

  BrokerAddress address_;
  std::chrono::milliseconds timeout_;
  std::string session_;
  net::Socket socket_;
  std::thread reader_;
  std::atomic<bool> stop_{false};
  std::mutex write_mutex_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<std::uint8_t> connack_;
  bool closed_ = false;
  std::uint16_t packet_id_ = 0;
  std::map<std::uint16_t, SubscriptionId> pending_subscribe_;
  std::set<std::uint16_t> acked_;
};

}  // namespace

std::unique_ptr<Connection> connect_mqtt(const BrokerAddress& address, std::string client_id,
                                         std::chrono::milliseconds timeout, std::size_t queue_capacity) {
  try {
    return std::make_unique<MqttConnection>(address, std::move(client_id), timeout, queue_capacity);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::transport) throw;
    throw Error(ErrorCode::transport, address.str() + ": " + e.detail() + " (check ARTHUR_BROKER or --broker; retry in 1 s)");
  }
}

// --- broker -----------------------------------------------------------------

struct MqttBroker::Impl {
  struct Client {
    net::Socket socket;
    std::string buffer;
    std::string client_id;
    bool connected = false;
    std::map<std::string, std::uint8_t> filters;
    std::uint16_t packet_id = 0;
  };

  net::Socket listener;
  std::thread thread;
  std::atomic<bool> stop{false};
  mutable std::mutex mutex;
  std::map<int, std::unique_ptr<Client>> clients;
  std::map<std::string, mqtt::Publish> retained;

  void run() {
    while (!stop) {
      std::vector<pollfd> fds;
      fds.push_back({listener.fd(), POLLIN, 0});
      {
        std::lock_guard lock(mutex);
        for (const auto& [fd, c] : clients) fds.push_back({fd, POLLIN, 0});
      }
      if (::poll(fds.data(), fds.size(), 50) <= 0) continue;
      if ((fds[0].revents & POLLIN) != 0) accept_client();
      for (std::size_t i = 1; i < fds.size(); ++i) {
        if (fds[i].revents == 0) continue;
        std::lock_guard lock(mutex);
        auto it = clients.find(fds[i].fd);
        if (it == clients.end()) continue;
        if (!service(*it->second)) clients.erase(it);
      }
    }
  }

  void accept_client() {
    const int fd = ::accept(listener.fd(), nullptr, nullptr);
    if (fd < 0) return;
    auto c = std::make_unique<Client>();
    c->socket = net::Socket(fd);
    std::lock_guard lock(mutex);
    clients[fd] = std::move(c);
  }

  bool service(Client& c) {
    if (!net::read_available(c.socket.fd(), c.buffer)) return false;
    try {
      while (auto p = mqtt::extract_packet(c.buffer)) {
        if (!handle(c, *p)) return false;
      }
    } catch (const Error&) {
      return false;
    }
    return true;
  }

  void send(Client& c, const std::string& bytes) { net::send_all(c.socket.fd(), bytes); }

  void forward(Client& c, const mqtt::Publish& pub, std::uint8_t qos, bool retain) {
    mqtt::Publish out = pub;
    out.qos = qos;
    out.retain = retain;
    out.dup = false;
    if (qos > 0) {
      if (++c.packet_id == 0) c.packet_id = 1;
      out.packet_id = c.packet_id;
    }
    send(c, mqtt::encode_publish(out));
  }

  bool handle(Client& c, const mqtt::Packet& p) {
    if (!c.connected && p.type != mqtt::PacketType::connect) return false;
    switch (p.type) {
      case mqtt::PacketType::connect: {
        const auto req = mqtt::decode_connect(p);
        c.client_id = req.client_id;
        c.connected = true;
        send(c, mqtt::encode_connack(0));
        return true;
      }
      case mqtt::PacketType::publish: {
        const auto pub = mqtt::decode_publish(p);
        if (!valid_topic(pub.topic)) return false;
        if (pub.retain) {
          if (pub.payload.empty()) {
            retained.erase(pub.topic);
          } else {
            retained[pub.topic] = pub;
          }
        }
        for (auto& [fd, other] : clients) {
          std::optional<std::uint8_t> qos;
          for (const auto& [filter, fq] : other->filters) {
            if (topic_matches(filter, pub.topic)) qos = std::max<std::uint8_t>(qos.value_or(0), fq);
          }
          if (qos) forward(*other, pub, std::min(*qos, pub.qos), false);
        }
        if (pub.qos == 1) send(c, mqtt::encode_puback(pub.packet_id));
        return true;
      }
      case mqtt::PacketType::subscribe: {
        const auto sub = mqtt::decode_subscribe(p);
        std::vector<std::uint8_t> codes;
        for (const auto& [filter, qos] : sub.filters) {
          if (!valid_filter(filter)) {
            codes.push_back(0x80);
            continue;
          }
          const auto granted = std::min<std::uint8_t>(qos, 1);
          c.filters[filter] = granted;
          codes.push_back(granted);
        }
        send(c, mqtt::encode_suback(sub.packet_id, codes));
        for (const auto& [filter, qos] : sub.filters) {
          if (!valid_filter(filter)) continue;
          for (const auto& [topic, msg] : retained) {
            if (topic_matches(filter, topic)) forward(c, msg, std::min<std::uint8_t>(msg.qos, 1), true);
          }
        }
        return true;
      }
      case mqtt::PacketType::unsubscribe: {
        const auto [id, filters] = mqtt::decode_unsubscribe(p);
        for (const auto& f : filters) c.filters.erase(f);
        send(c, mqtt::encode_unsuback(id));
        return true;
      }
      case mqtt::PacketType::pingreq: send(c, mqtt::encode_empty(mqtt::PacketType::pingresp)); return true;
      case mqtt::PacketType::disconnect: return false;
      case mqtt::PacketType::puback: return true;
      default: return false;
    }
  }
};

MqttBroker::MqttBroker(std::uint16_t port, std::string bind_address) : impl_(std::make_unique<Impl>()) {
  impl_->listener = net::listen_tcp(bind_address, port, port_);
  impl_->thread = std::thread([this] { impl_->run(); });
}

MqttBroker::~MqttBroker() { stop(); }

void MqttBroker::stop() {
  if (!impl_ || impl_->stop) return;
  impl_->stop = true;
  if (impl_->thread.joinable()) impl_->thread.join();
  std::lock_guard lock(impl_->mutex);
  impl_->clients.clear();
  impl_->listener.close();
}

std::size_t MqttBroker::client_count() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->clients.size();
}

}  // namespace arthur::bus
