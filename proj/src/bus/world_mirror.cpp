#include "arthur/bus/world_mirror.hpp"

#include <algorithm>

#include "arthur/bus/topic.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::bus {

namespace {

constexpr std::array<BodyPart, 3> kParts = {BodyPart::head, BodyPart::hand_left, BodyPart::hand_right};

std::string body_key(BodyPart b) {
  auto s = std::string(to_string(b));
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

}  // namespace

json body_to_json(const std::map<BodyPart, Pose>& body, std::int64_t timestamp_ms) {
  json j = {{"timestamp_ms", timestamp_ms}};
  for (auto b : kParts) {
    auto it = body.find(b);
    j[body_key(b)] = it == body.end() ? json(nullptr) : pose_to_json(it->second);
  }
  return j;
}

WorldMirror::WorldMirror(std::string workstation_id, std::int64_t retention_ms)
    : ws_(std::move(workstation_id)), root_(std::string(topics::kRoot) + "/" + ws_ + "/"), retention_ms_(retention_ms) {}

void WorldMirror::attach(Connection& c) {
  auto handler = [this](const Envelope& e) { apply(e); };
  c.subscribe(topics::robot_state(ws_, "+"), handler);
  c.subscribe(topics::user_body(ws_), handler);
  c.subscribe(topics::task_status(ws_, "+"), handler);
  c.subscribe(topics::input_events(ws_), handler);
  c.subscribe(topics::zone(ws_, "+"), handler);
  c.subscribe(topics::assembly_progress(ws_), handler);
}

void WorldMirror::track_messages(Connection& c, const std::set<std::string>& filters) {
  for (auto it = message_subs_.begin(); it != message_subs_.end();) {
    if (filters.count(it->first) == 0) {
      c.unsubscribe(it->second);
      it = message_subs_.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& f : filters) {
    if (message_subs_.count(f) > 0 || !valid_filter(f)) continue;
    message_subs_[f] = c.subscribe(f, [this](const Envelope& e) { record_message(e); });
  }
}

void WorldMirror::set_now(std::int64_t now_ms) {
  world_.now_ms = now_ms;
  const auto horizon = now_ms - retention_ms_;
  auto& ev = world_.events;
  ev.erase(std::remove_if(ev.begin(), ev.end(), [&](const auto& e) { return e.timestamp_ms < horizon; }), ev.end());
  auto& ms = world_.messages;
  ms.erase(std::remove_if(ms.begin(), ms.end(), [&](const auto& m) { return m.timestamp_ms < horizon; }), ms.end());
}

void WorldMirror::record_message(const Envelope& e) {
  if (e.payload.is_null()) return;
  MessageEvent m{e.topic, e.payload, world_.now_ms};
  world_.messages.push_back(m);
  world_.latest_messages[e.topic] = std::move(m);
  ++changes_;
}

bool WorldMirror::apply(const Envelope& e) {
  if (e.topic.rfind(root_, 0) != 0) return false;
  const auto rest = e.topic.substr(root_.size());
  const auto& p = e.payload;
  try {
    if (rest.rfind("robot/", 0) == 0) {
      const auto agent = rest.substr(6, rest.size() - 6 - 6);
      if (p.is_null()) {
        world_.robots.erase(agent);
      } else {
        world_.robots[agent] = robot_state_from_json(p);
      }
    } else if (rest == "user/body") {
      for (auto b : kParts) {
        const auto key = body_key(b);
        if (p.contains(key) && !p[key].is_null()) {
          world_.body[b] = pose_from_json(p[key]);
        } else {
          world_.body.erase(b);
        }
      }
    } else if (rest.rfind("task/", 0) == 0) {
      const auto task = rest.substr(5, rest.size() - 5 - 7);
      if (p.is_null()) {
        world_.tasks.erase(task);
      } else {
        auto status = task_status_from_string(p.value("status", std::string()));
        if (!status) return false;
        world_.tasks[task] = {*status, p.value("agent", std::string())};
      }
    } else if (rest == "events/input") {
      world_.events.push_back(input_event_from_json(p));
    } else if (rest.rfind("zone/", 0) == 0) {
      const auto zone = rest.substr(5);
      if (p.is_null()) {
        world_.zones.erase(zone);
      } else {
        std::vector<Vec3> pts;
        for (const auto& v : p.at("points")) pts.push_back(vec3_from_json(v));
        world_.zones[zone] = std::move(pts);
      }
    } else if (rest == "assembly/progress") {
      progress_ = p;
    } else {
      return false;
    }
  } catch (const std::exception&) {
    return false;  // malformed live data is ignored
  }
  ++changes_;
  return true;
}

}  // namespace arthur::bus
