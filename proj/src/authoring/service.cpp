#include "arthur/authoring/service.hpp"

#include "arthur/authoring/fake_data.hpp"
#include "arthur/bus/config_sync.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::authoring {

namespace {

const json& arg(const json& args, const char* name) {
  if (!args.is_object() || !args.contains(name)) throw Error(ErrorCode::invalid_argument, std::string("missing argument '") + name + "'");
  return args.at(name);
}

std::string str_arg(const json& args, const char* name) {
  const auto& v = arg(args, name);
  if (!v.is_string()) throw Error(ErrorCode::invalid_argument, std::string("argument '") + name + "' must be a string");
  return v.get<std::string>();
}

Entity entity_arg(const json& args) {
  auto e = entity_from_string(str_arg(args, "entity"));
  if (!e) throw Error(ErrorCode::invalid_argument, "unknown entity '" + str_arg(args, "entity") + "'");
  return *e;
}

json revision(std::uint64_t r) { return {{"revision", r}}; }

}  // namespace

AuthoringService::AuthoringService(std::unique_ptr<bus::Connection> connection, Authoring model, std::uint64_t seed)
    : Service(kName, model.workstation().id, std::move(connection)), model_(std::move(model)), seed_(seed) {}

void AuthoringService::start(std::int64_t now_ms) {
  const auto& ws = workstation_id();
  // Clear retained config left over from an earlier run that no longer exists.
  std::vector<std::string> stale;
  const auto probe = bus().subscribe(bus::topics::config(ws, "+", "+"), [&](const bus::Envelope& e) {
    if (e.retained && !e.payload.is_null()) stale.push_back(e.topic);
  });
  bus().poll();
  bus().unsubscribe(probe);
  sync();
  for (const auto& t : stale) {
    if (published_.count(t) == 0) bus().publish(t, nullptr, true);
  }
  serve(bus::topics::rpc_request(ws, kName), bus::topics::rpc_response(ws, kName),
        [this](const std::string& op, const json& args) { return handle(op, args); });
  bus().subscribe(bus::topics::action_events(ws), [this](const bus::Envelope& e) { on_action(e); });
  Service::start(now_ms);
}

void AuthoringService::sync() {
  const auto& ws = model_.workstation();
  auto next = bus::config_messages(ws);
  const auto meta = bus::topics::config_meta(ws.id);
  for (const auto& [topic, payload] : published_) {
    if (next.count(topic) > 0) continue;
    bus().publish(topic, nullptr, true);
    const auto id = topic.substr(topic.rfind('/') + 1);
    const auto cat_end = topic.rfind('/');
    const auto cat = topic.substr(topic.rfind('/', cat_end - 1) + 1, cat_end - topic.rfind('/', cat_end - 1) - 1);
    bus().publish(bus::topics::config_deleted(ws.id, id), {{"id", id}, {"category", cat}, {"revision", ws.revision}});
  }
  for (const auto& [topic, payload] : next) {
    if (topic == meta) continue;
    auto it = published_.find(topic);
    if (it == published_.end() || it->second != payload) bus().publish(topic, payload, true);
  }
  if (published_[meta] != next[meta]) bus().publish(meta, next[meta], true);
  published_ = std::move(next);
}

json AuthoringService::handle(const std::string& op, const json& args) {
  json result;
  if (op == "registry") {
    result = json::array();
    for (const auto& s : model_.registry().specs()) result.push_back(spec_to_json(s));
    return result;
  }
  if (op == "snapshot") return to_json(model_.workstation());
  if (op == "diagnostics") return model_.diagnostics();
  if (op == "create") {
    std::optional<std::string> id, visibility;
    if (args.contains("id") && !args["id"].is_null()) id = str_arg(args, "id");
    if (args.contains("visibility") && !args["visibility"].is_null()) visibility = str_arg(args, "visibility");
    auto r = model_.create_component(str_arg(args, "kind"), args.value("properties", json::object()), id, visibility);
    result = {{"id", r.id}, {"implicit", r.implicit}, {"revision", r.revision}};
  } else if (op == "update_property") {
    result = revision(model_.update_property(str_arg(args, "id"), str_arg(args, "name"), arg(args, "value")));
  } else if (op == "set_visibility") {
    const auto& c = arg(args, "condition");
    result = revision(model_.set_visibility(str_arg(args, "id"),
                                            c.is_null() ? std::nullopt : std::optional<std::string>(c.get<std::string>())));
  } else if (op == "set_enabled") {
    const auto& e = arg(args, "enabled");
    if (!e.is_boolean()) throw Error(ErrorCode::invalid_argument, "argument 'enabled' must be a boolean");
    result = revision(model_.set_enabled(str_arg(args, "id"), e.get<bool>()));
  } else if (op == "delete") {
    auto r = model_.delete_component(str_arg(args, "id"));
    result = {{"deleted", r.deleted}, {"revision", r.revision}};
  } else if (op == "upsert") {
    result = revision(model_.upsert(entity_arg(args), arg(args, "value")));
  } else if (op == "remove") {
    result = revision(model_.remove(entity_arg(args), str_arg(args, "id")));
  } else if (op == "set_phase") {
    auto p = phase_from_string(str_arg(args, "phase"));
    if (!p) throw Error(ErrorCode::invalid_argument, "unknown phase '" + str_arg(args, "phase") + "'");
    result = revision(model_.set_phase(*p));
  } else if (op == "set_position") {
    result = revision(model_.set_position(str_arg(args, "id"), pose_from_json(arg(args, "pose"))));
  } else if (op == "fake") {
    FakeOptions o;
    o.agent = args.value("agent", std::string());
    o.zone_id = args.value("zone_id", std::string("fake-zone"));
    o.seed = args.value("seed", seed_ + fake_calls_);
    auto messages = generate_fake_data(model_.workstation(), str_arg(args, "kind"), o);
    ++fake_calls_;
    result = json::array();
    for (auto& m : messages) {
      bus().publish(m.topic, m.payload);
      result.push_back({{"topic", m.topic}, {"payload", m.payload}});
    }
    return result;
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown operation '" + op + "'");
  }
  sync();
  return result;
}

void AuthoringService::on_action(const bus::Envelope& e) {
  const auto& p = e.payload;
  if (!p.is_object()) return;
  const auto kind = p.value("kind", std::string());
  const auto props = p.value("properties", json::object());
  try {
    if (kind == "send-mqtt-message") {
      const auto topic = props.value("topic", std::string());
      if (!bus::valid_topic(topic) || (topic.rfind("arthur/", 0) == 0 && !bus::matches_scheme(topic))) {
        log_.push_back("send-mqtt-message " + p.value("action", std::string()) + ": invalid topic '" + topic + "'");
        return;
      }
      const auto text = props.value("payload", std::string("{}"));
      json payload = json::parse(text, nullptr, false);
      if (payload.is_discarded()) payload = text;
      bus().publish(topic, std::move(payload), props.value("retained", false));
    } else if (kind == "toggle-feedback") {
      const auto target = props.value("feedback", std::string());
      const auto* d = model_.workstation().component(target);
      if (d == nullptr) {
        log_.push_back("toggle-feedback: unknown feedback '" + target + "'");
        return;
      }
      model_.set_enabled(target, !d->enabled);
      sync();
    } else if (kind == "acknowledge") {
      acknowledgments_.push_back({{"action", p.value("action", std::string())},
                                  {"message", props.value("message", std::string())},
                                  {"timestamp_ms", p.value("timestamp_ms", std::int64_t{0})}});
    }
  } catch (const Error& err) {
    log_.push_back(kind + ": " + err.what());
  }
}

json AuthoringService::status_detail() const {
  return {{"revision", model_.revision()}, {"phase", to_string(model_.workstation().phase)}};
}

}  // namespace arthur::authoring
