#include "arthur/bus/config_sync.hpp"

#include <algorithm>

#include "arthur/bus/topic.hpp"
#include "arthur/core/registry.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::bus {

namespace {

json meta_of(const Workstation& ws) {
  return {{"id", ws.id},
          {"name", ws.name},
          {"phase", to_string(ws.phase)},
          {"revision", ws.revision},
          {"next_serial", ws.next_serial}};
}

}  // namespace

std::map<std::string, json> config_messages(const Workstation& ws) {
  std::map<std::string, json> out;
  const auto& id = ws.id;
  out[topics::config_meta(id)] = meta_of(ws);
  for (const auto& [k, v] : ws.agents) out[topics::config(id, "agent", k)] = to_json(v);
  for (const auto& [k, v] : ws.trackers) out[topics::config(id, "tracker", k)] = to_json(v);
  for (const auto& [k, v] : ws.anchors) out[topics::config(id, "anchor", k)] = to_json(v);
  for (const auto& [k, v] : ws.tools) out[topics::config(id, "tool", k)] = to_json(v);
  for (const auto& [k, v] : ws.parts) out[topics::config(id, "part", k)] = to_json(v);
  for (const auto& [k, v] : ws.components) {
    out[topics::config(id, to_string(category_of(v)), k)] = to_json(v);
  }
  for (std::size_t i = 0; i < ws.tasks.size(); ++i) {
    auto j = to_json(ws.tasks[i]);
    j["order"] = i;
    out[topics::config(id, "task", ws.tasks[i].id)] = std::move(j);
  }
  return out;
}

ConfigMirror::ConfigMirror(std::string workstation_id)
    : ws_(std::move(workstation_id)), prefix_(std::string(topics::kRoot) + "/" + ws_ + "/config/") {}

std::string ConfigMirror::filter() const { return prefix_ + "#"; }

bool ConfigMirror::apply(const Envelope& e) {
  if (e.topic.rfind(prefix_, 0) != 0) return false;
  if (e.topic.compare(prefix_.size(), 8, "deleted/") == 0) return true;
  if (e.payload.is_null()) {
    messages_.erase(e.topic);
  } else {
    messages_[e.topic] = e.payload;
    if (e.topic == topics::config_meta(ws_) && e.payload.contains("revision")) {
      revision_ = e.payload["revision"].get<std::uint64_t>();
    }
  }
  return true;
}

std::optional<Workstation> ConfigMirror::workstation() const {
  auto meta = messages_.find(topics::config_meta(ws_));
  if (meta == messages_.end()) return std::nullopt;
  json doc = meta->second;
  for (const char* key : {"agents", "trackers", "anchors", "tools", "parts", "tasks"}) doc[key] = json::array();
  doc["components"] = {{"feedback", json::array()}, {"action", json::array()}, {"condition", json::array()}};
  std::vector<std::pair<std::size_t, json>> tasks;
  for (const auto& [topic, payload] : messages_) {
    const auto rest = topic.substr(prefix_.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos) continue;
    const auto cat = rest.substr(0, slash);
    if (cat == "task") {
      auto t = payload;
      const auto order = t.value("order", std::size_t{0});
      t.erase("order");
      tasks.emplace_back(order, std::move(t));
    } else if (cat == "feedback" || cat == "action" || cat == "condition") {
      doc["components"][cat].push_back(payload);
    } else {
      doc[cat + "s"].push_back(payload);
    }
  }
  std::stable_sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [order, t] : tasks) doc["tasks"].push_back(std::move(t));
  return workstation_from_json(doc);
}

}  // namespace arthur::bus
