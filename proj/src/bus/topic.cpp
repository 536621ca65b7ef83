#include "arthur/bus/topic.hpp"

#include <array>
#include <vector>

namespace arthur::bus {

namespace {

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find('/', start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (auto p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

bool is_id(std::string_view s) { return !s.empty(); }

}  // namespace

bool valid_topic(std::string_view topic) {
  if (topic.empty() || topic.size() > 65535 || topic.front() == '$') return false;
  for (char c : topic) {
    if (c == '+' || c == '#' || c == '\0') return false;
  }
  for (auto level : split(topic)) {
    if (level.empty()) return false;
  }
  return true;
}

bool valid_filter(std::string_view filter) {
  if (filter.empty() || filter.size() > 65535) return false;
  const auto levels = split(filter);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto l = levels[i];
    if (l.find('\0') != std::string_view::npos) return false;
    if (l == "#") {
      if (i + 1 != levels.size()) return false;
    } else if (l == "+") {
      continue;
    } else if (l.find_first_of("+#") != std::string_view::npos) {
      return false;
    }
  }
  return true;
}

bool topic_matches(std::string_view filter, std::string_view topic) {
  const auto f = split(filter);
  const auto t = split(topic);
  std::size_t i = 0;
  for (; i < f.size(); ++i) {
    if (f[i] == "#") return true;
    if (i >= t.size()) return false;
    if (f[i] != "+" && f[i] != t[i]) return false;
  }
  return i == t.size();
}

bool matches_scheme(std::string_view topic) {
  if (!valid_topic(topic)) return false;
  const auto l = split(topic);
  if (l.size() < 3 || l[0] != topics::kRoot) return false;
  const auto n = l.size();
  const auto kind = l[2];
  if (kind == "config") {
    if (n == 4) return l[3] == "meta";
    if (n != 5) return false;
    static constexpr std::array<std::string_view, 11> cats = {"feedback", "action", "condition", "agent",
                                                              "tracker",  "anchor", "tool",      "part",
                                                              "task",     "deleted", "meta"};
    for (auto c : cats) {
      if (l[3] == c) return is_id(l[4]);
    }
    return false;
  }
  if (kind == "robot") return n == 5 && l[4] == "state";
  if (kind == "events") return n == 4 && (l[3] == "input" || l[3] == "action" || l[3] == "condition");
  if (kind == "conditions") return n == 4 && l[3] == "state";
  if (kind == "task") return n == 5 && l[4] == "status";
  if (kind == "assembly") return n == 4 && (l[3] == "progress" || l[3] == "dispatch");
  if (kind == "zone") return n == 4;
  if (kind == "service") return n == 5 && (l[4] == "status" || l[4] == "command");
  if (kind == "user") return n == 4 && l[3] == "body";
  if (kind == "fake") return n == 4;
  if (kind == "rpc") {
    if (n == 5) return l[4] == "request" || l[4] == "response";
    if (n == 6) return l[3] == "robot" && (l[5] == "request" || l[5] == "response");
    return false;
  }
  if (kind == "custom") return n >= 4;
  return false;
}

namespace topics {

std::string config(std::string_view ws, std::string_view category, std::string_view id) {
  return join({kRoot, ws, "config", category, id});
}
std::string config_deleted(std::string_view ws, std::string_view id) { return join({kRoot, ws, "config", "deleted", id}); }
std::string config_meta(std::string_view ws) { return join({kRoot, ws, "config", "meta"}); }
std::string robot_state(std::string_view ws, std::string_view agent) { return join({kRoot, ws, "robot", agent, "state"}); }
std::string input_events(std::string_view ws) { return join({kRoot, ws, "events", "input"}); }
std::string action_events(std::string_view ws) { return join({kRoot, ws, "events", "action"}); }
std::string condition_events(std::string_view ws) { return join({kRoot, ws, "events", "condition"}); }
std::string condition_report(std::string_view ws) { return join({kRoot, ws, "conditions", "state"}); }
std::string task_status(std::string_view ws, std::string_view task) { return join({kRoot, ws, "task", task, "status"}); }
std::string assembly_progress(std::string_view ws) { return join({kRoot, ws, "assembly", "progress"}); }
std::string assembly_dispatch(std::string_view ws) { return join({kRoot, ws, "assembly", "dispatch"}); }
std::string zone(std::string_view ws, std::string_view zone_id) { return join({kRoot, ws, "zone", zone_id}); }
std::string service_status(std::string_view ws, std::string_view service) {
  return join({kRoot, ws, "service", service, "status"});
}
std::string user_body(std::string_view ws) { return join({kRoot, ws, "user", "body"}); }
std::string fake(std::string_view ws, std::string_view kind) { return join({kRoot, ws, "fake", kind}); }
std::string rpc_request(std::string_view ws, std::string_view service) { return join({kRoot, ws, "rpc", service, "request"}); }
std::string rpc_response(std::string_view ws, std::string_view service) {
  return join({kRoot, ws, "rpc", service, "response"});
}
std::string robot_rpc_request(std::string_view ws, std::string_view agent) {
  return join({kRoot, ws, "rpc", "robot", agent, "request"});
}
std::string robot_rpc_response(std::string_view ws, std::string_view agent) {
  return join({kRoot, ws, "rpc", "robot", agent, "response"});
}
std::string service_command(std::string_view ws, std::string_view service) {
  return join({kRoot, ws, "service", service, "command"});
}

std::string all(std::string_view ws) { return join({kRoot, ws, "#"}); }

}  // namespace topics

}  // namespace arthur::bus
