#include "arthur/scenario/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "arthur/bus/service.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/anchors.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::scenario {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::load, "scenario " + path + ": " + what);
}

std::string stamp(std::int64_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%7lld", static_cast<long long>(t));
  return buf;
}

std::vector<std::string> targets(const json& c) {
  std::vector<std::string> out;
  if (c.contains("targets")) {
    for (const auto& t : c.at("targets")) out.push_back(t.get<std::string>());
  } else {
    out.push_back(c.at("target").get<std::string>());
  }
  return out;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

/// Runs one scenario; keeps the bookkeeping needed to emit change-only trace lines.
class Runner {
 public:
  Runner(const Scenario& s, runtime::Runtime& rt) : s_(s), rt_(rt), ws_(s.workstation.id) {}

  void setup(Run& out) {
    for (std::size_t i = 0; i < s_.setup.size(); ++i) {
      const auto& r = s_.setup[i];
      const auto id = rt_.client().request(r.at("op").get<std::string>(), r.value("args", json::object()));
      std::optional<json> resp;
      for (int k = 0; k < 100 && !(resp = rt_.client().response(id)); ++k) rt_.run_for(10);
      if (!resp) {
        out.failures.push_back("setup " + std::to_string(i) + ": no response from authoring");
      } else if (!resp->value("ok", false)) {
        out.failures.push_back("setup " + std::to_string(i) + " (" + r.at("op").get<std::string>() +
                               "): " + resp->at("error").value("message", std::string()));
      }
    }
    rt_.run_for(100);
  }

  void apply(const json& c, std::int64_t t, std::vector<std::string>& trace) {
    const auto what = c.at("do").get<std::string>();
    std::string line = stamp(t) + " > " + what;
    if (what == "poke" || what == "gaze" || what == "pinch" || what == "button" || what == "speech") {
      const auto type = *input_type_from_string(what);
      for (const auto& target : targets(c)) {
        InputEvent e;
        e.type = type;
        e.target = target;
        e.source = c.value("source", std::string());
        rt_.client().inject(e);
        line += " " + target;
      }
    } else if (what == "body") {
      std::map<BodyPart, Pose> body;
      for (auto it = c.at("parts").begin(); it != c.at("parts").end(); ++it) {
        body[*body_part_from_string(it.key())] = pose_from_json(*it);
        line += " " + it.key();
      }
      rt_.client().publish_body(body);
    } else if (what == "publish") {
      const auto topic = c.at("topic").get<std::string>();
      rt_.control().publish(topic, c.at("payload"), c.value("retained", false));
      line += " " + topic + " " + c.at("payload").dump();
    } else if (what == "request") {
      const auto op = c.at("op").get<std::string>();
      pending_.push_back({rt_.client().request(op, c.value("args", json::object())), op});
      line += " " + op + " " + c.value("args", json::object()).dump();
    } else if (what == "robot") {
      const auto agent = c.at("agent").get<std::string>();
      auto& rpc = robot_rpc(agent);
      const auto op = c.at("op").get<std::string>();
      rpc.call(op, c.value("args", json::object()));
      line += " " + agent + " " + op;
    } else {
      throw Error(ErrorCode::invalid_argument, "unknown timeline command '" + what + "'");
    }
    trace.push_back(line);
  }

  void feed_zone(std::int64_t now) {
    if (!s_.zone_feed) return;
    const auto& f = *s_.zone_feed;
    if (now < next_zone_) return;
    next_zone_ = now + f.period_ms;
    const auto& world = rt_.client().world();
    const auto* agent = s_.workstation.agent(f.agent);
    if (agent == nullptr) return;
    Pose base;
    try {
      base = robot_base_pose(*agent, s_.workstation, world);
    } catch (const Error&) {
      return;
    }
    double reach = 0.0;
    if (auto it = world.robots.find(f.agent); it != world.robots.end()) {
      reach = it->second.tcp.position().head<2>().norm();
    }
    const double r = round4(f.margin + reach);
    json pts = json::array();
    for (int i = 0; i < f.points; ++i) {
      const double a = 2.0 * M_PI * i / f.points;
      const Vec3 p = base.transform(Vec3(r * std::cos(a), r * std::sin(a), 0.0));
      pts.push_back({round4(p.x()), round4(p.y()), round4(p.z())});
    }
    rt_.control().publish(bus::topics::zone(ws_, f.zone), {{"points", pts}, {"timestamp_ms", now}});
  }

  void observe(std::int64_t t0, std::vector<std::string>& trace) {
    auto& client = rt_.client();
    const auto t = rt_.now() - t0;
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (auto r = client.response(it->first)) {
        trace.push_back(stamp(t) + " request " + it->second + " -> " +
                        (r->value("ok", false) ? std::string("ok") : "error " + r->at("error").value("code", std::string())));
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    const auto& actions = client.action_log();
    for (; actions_seen_ < actions.size(); ++actions_seen_) {
      const auto& a = actions[actions_seen_];
      trace.push_back(stamp(a.value("timestamp_ms", rt_.now()) - t0) + " action " + a.value("kind", std::string()) +
                      " " + a.value("action", std::string()) + " trigger=" + a.value("condition", std::string()));
    }
    const auto& world = client.world();
    for (const auto& [id, info] : world.tasks) {
      const auto line = std::string(to_string(info.status)) + " agent=" + (info.agent.empty() ? "-" : info.agent);
      if (auto& last = tasks_[id]; last != line) {
        last = line;
        trace.push_back(stamp(t) + " task " + id + " " + line);
      }
    }
    for (const auto& [id, r] : world.robots) {
      const auto line = std::string(to_string(r.run_state)) + " task=" + (r.task.empty() ? "-" : r.task) +
                        " waiting=" + (r.waiting_for_ack ? "1" : "0");
      if (auto& last = robots_[id]; last != line) {
        last = line;
        trace.push_back(stamp(t) + " robot " + id + " " + line);
      }
    }
    std::vector<std::string> watch = s_.watch;
    if (watch.empty()) {
      for (const auto& n : client.nodes()) watch.push_back(n.id);
    }
    for (const auto& id : watch) {
      const auto* n = client.node(id);
      std::string line = n == nullptr ? std::string("absent")
                                      : std::string("visible=") + (n->visible ? "1" : "0") + " data=" + n->data.dump();
      if (n != nullptr && !n->points.empty()) line += " points=" + std::to_string(n->points.size());
      if (auto& last = nodes_[id]; last != line) {
        last = line;
        trace.push_back(stamp(t) + " node " + id + " " + line);
      }
    }
  }

 private:
  bus::RpcClient& robot_rpc(const std::string& agent) {
    auto& slot = robot_rpc_[agent];
    if (!slot) {
      slot = std::make_unique<bus::RpcClient>(rt_.control(), bus::topics::robot_rpc_request(ws_, agent),
                                              bus::topics::robot_rpc_response(ws_, agent));
    }
    return *slot;
  }

  const Scenario& s_;
  runtime::Runtime& rt_;
  std::string ws_;
  std::size_t actions_seen_ = 0;
  std::map<std::string, std::string> tasks_, robots_, nodes_;
  std::vector<std::pair<std::string, std::string>> pending_;
  std::map<std::string, std::unique_ptr<bus::RpcClient>> robot_rpc_;
  std::int64_t next_zone_ = 0;
};

}  // namespace

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    s.name = j.at("name").get<std::string>();
    s.description = j.value("description", std::string());
    s.workstation = workstation_from_json(j.at("workstation"));
    for (const auto& r : j.value("setup", json::array())) {
      if (!r.contains("op")) fail("/setup", "request without op");
      s.setup.push_back(r);
    }
    const auto& timeline = j.value("timeline", json::array());
    for (std::size_t i = 0; i < timeline.size(); ++i) {
      const auto& e = timeline[i];
      if (!e.contains("at") || !e.contains("do")) fail("/timeline/" + std::to_string(i), "needs 'at' and 'do'");
      s.timeline.push_back({e.at("at").get<std::int64_t>(), e});
    }
    s.watch = j.value("watch", std::vector<std::string>{});
    s.duration_ms = j.value("duration_ms", s.duration_ms);
    if (j.contains("zone_feed")) {
      const auto& z = j.at("zone_feed");
      ZoneFeed f;
      f.zone = z.at("zone").get<std::string>();
      f.agent = z.at("agent").get<std::string>();
      f.period_ms = z.value("period_ms", f.period_ms);
      f.points = z.value("points", f.points);
      f.margin = z.value("margin", f.margin);
      s.zone_feed = f;
    }
    s.options = j.value("options", json::object());
  } catch (const nlohmann::json::exception& e) {
    fail("", e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::load) throw;
    fail("/workstation", e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, file.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::filesystem::path scenario_path(const std::string& name_or_path, const std::filesystem::path& data_dir) {
  if (!name_or_path.empty() && name_or_path.find_first_not_of("0123456789") == std::string::npos) {
    return data_dir / "scenarios" / ("scenario" + name_or_path + ".json");
  }
  return name_or_path;
}

std::filesystem::path golden_path(const std::filesystem::path& scenario_file) {
  auto p = scenario_file;
  return p.replace_extension(".trace");
}

runtime::Options apply_options(const Scenario& s, runtime::Options o) {
  const auto& j = s.options;
  o.step_ms = j.value("step_ms", o.step_ms);
  o.robot_rate_hz = j.value("robot_rate_hz", o.robot_rate_hz);
  o.require_ack = j.value("require_ack", o.require_ack);
  o.scene_clients = std::max(1, j.value("scene_clients", o.scene_clients));
  return o;
}

Run run(const Scenario& s, const runtime::ConnectionFactory& connect, runtime::Options base,
        const StepObserver& observer) {
  Run out;
  runtime::Runtime rt(s.workstation, connect, apply_options(s, base));
  rt.start();
  Runner runner(s, rt);
  runner.setup(out);
  if (!out.failures.empty()) return out;
  const auto t0 = rt.now();
  const auto step = apply_options(s, base).step_ms;
  out.operation_start_ms = t0;
  std::size_t next = 0;
  runner.observe(t0, out.trace);
  while (rt.now() - t0 < s.duration_ms) {
    const auto t = rt.now() - t0;
    for (; next < s.timeline.size() && s.timeline[next].at_ms <= t; ++next) runner.apply(s.timeline[next].command, t, out.trace);
    runner.feed_zone(rt.now());
    rt.run_for(step);
    runner.observe(t0, out.trace);
    if (observer) observer(rt.now() - t0, rt);
  }
  rt.stop();
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::optional<Divergence> compare(const std::string& expected, const std::string& actual) {
  std::istringstream a(expected), b(actual);
  std::string la, lb;
  for (std::size_t n = 1;; ++n) {
    const bool ha = static_cast<bool>(std::getline(a, la));
    const bool hb = static_cast<bool>(std::getline(b, lb));
    if (!ha && !hb) return std::nullopt;
    if (!ha) la = "<end of trace>";
    if (!hb) lb = "<end of trace>";
    if (!ha || !hb || la != lb) return Divergence{n, la, lb};
  }
}

}  // namespace arthur::scenario
