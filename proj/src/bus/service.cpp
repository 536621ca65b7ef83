#include "arthur/bus/service.hpp"

#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"

namespace arthur::bus {

json rpc_request(const std::string& id, const std::string& client, const std::string& op, json args) {
  return {{"id", id}, {"client", client}, {"op", op}, {"args", std::move(args)}};
}

json rpc_ok(const std::string& id, json result) { return {{"id", id}, {"ok", true}, {"result", std::move(result)}}; }

json rpc_error(const std::string& id, const std::string& code, const std::string& message) {
  return {{"id", id}, {"ok", false}, {"error", {{"code", code}, {"message", message}}}};
}

Service::Service(std::string name, std::string workstation, std::unique_ptr<Connection> connection)
    : name_(std::move(name)), ws_(std::move(workstation)), connection_(std::move(connection)) {}

void Service::start(std::int64_t now_ms) {
  now_ms_ = now_ms;
  running_ = true;
  heartbeat("up");
  last_heartbeat_ms_ = now_ms;
}

void Service::tick(std::int64_t now_ms) {
  now_ms_ = now_ms;
  pump();
  on_tick(now_ms);
  if (running_ && now_ms - last_heartbeat_ms_ >= kHeartbeatPeriodMs) {
    heartbeat("up");
    last_heartbeat_ms_ = now_ms;
  }
}

std::size_t Service::pump() { return connection_->poll(); }

void Service::stop() {
  if (!running_) return;
  running_ = false;
  try {
    heartbeat("down");
  } catch (const Error&) {
    // Broker already gone; nothing left to announce to.
  }
}

void Service::heartbeat(const std::string& state) {
  json p = status_detail();
  p["service"] = name_;
  p["state"] = state;
  p["timestamp_ms"] = now_ms_;
  connection_->publish(topics::service_status(ws_, name_), std::move(p), true);
}

void Service::serve(const std::string& request_topic, const std::string& response_topic, RpcHandler handler) {
  connection_->subscribe(request_topic, [this, response_topic, handler = std::move(handler)](const Envelope& e) {
    if (e.retained || !e.payload.is_object()) return;
    const auto id = e.payload.value("id", std::string());
    json response;
    try {
      const auto op = e.payload.value("op", std::string());
      response = rpc_ok(id, handler(op, e.payload.value("args", json::object())));
    } catch (const Error& err) {
      response = rpc_error(id, std::string(to_string(err.code())), err.detail());
    } catch (const std::exception& err) {
      response = rpc_error(id, "invalid-argument", err.what());
    }
    connection_->publish(response_topic, std::move(response));
  });
}

RpcClient::RpcClient(Connection& connection, std::string request_topic, std::string response_topic)
    : connection_(connection), request_topic_(std::move(request_topic)) {
  connection_.subscribe(response_topic, [this](const Envelope& e) {
    if (!e.payload.is_object()) return;
    const auto id = e.payload.value("id", std::string());
    auto it = pending_.find(id);
    if (it == pending_.end()) return;
    auto done = std::move(it->second);
    pending_.erase(it);
    responses_[id] = e.payload;
    if (done) done(e.payload);
  });
}

std::string RpcClient::call(const std::string& op, json args, std::function<void(const json&)> done) {
  const auto id = connection_.client_id() + "-" + std::to_string(next_++);
  pending_[id] = std::move(done);
  connection_.publish(request_topic_, rpc_request(id, connection_.client_id(), op, std::move(args)));
  return id;
}

std::optional<json> RpcClient::response(const std::string& id) const {
  auto it = responses_.find(id);
  if (it == responses_.end()) return std::nullopt;
  return std::optional<json>(std::in_place, it->second);
}

}  // namespace arthur::bus
