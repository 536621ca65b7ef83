#pragma once

// Property checks for the three scripted scenarios, shared by the unit tests and
// the acceptance binary. Each check observes the run step by step and compares
// against values computed here, independently of the projection code.

#include <chrono>
#include <functional>
#include <map>
#include <set>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "arthur/bus/inprocess.hpp"
#include "arthur/core/serialize.hpp"
#include "arthur/scenario/scenario.hpp"
#include "arthur/scene/client.hpp"

namespace arthur::testing {

struct Check {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

struct ScenarioOutcome {
  scenario::Run run;
  std::string trace;
  std::string golden;
  std::optional<scenario::Divergence> divergence;
  Check properties;
  double wall_s = 0;
};

inline std::filesystem::path scenario_file(int n) {
  return std::filesystem::path(ARTHUR_DATA_DIR) / "scenarios" / ("scenario" + std::to_string(n) + ".json");
}

inline std::int64_t trace_time(const std::string& line) { return std::stoll(line.substr(0, 7)); }

/// Index of the first line at or after `from` containing `needle`, or npos.
inline std::size_t find_line(const std::vector<std::string>& trace, std::size_t from, const std::string& needle) {
  for (std::size_t i = from; i < trace.size(); ++i) {
    if (trace[i].find(needle) != std::string::npos) return i;
  }
  return std::string::npos;
}

/// Operator-facing "current task": the agent's active task, else its first unfinished one in BoP order.
inline const Task* expected_current_task(const std::string& agent, const Workstation& ws, const WorldState& w) {
  auto info = [&](const Task& t) {
    auto it = w.tasks.find(t.id);
    return it == w.tasks.end() ? TaskInfo{TaskStatus::pending, t.agent} : it->second;
  };
  auto owner = [&](const Task& t) { return info(t).agent.empty() ? t.agent : info(t).agent; };
  for (const auto& t : ws.tasks)
    if (owner(t) == agent && info(t).status == TaskStatus::active) return &t;
  for (const auto& t : ws.tasks)
    if (owner(t) == agent && info(t).status != TaskStatus::completed) return &t;
  return nullptr;
}

inline ScenarioOutcome run_checked(int n, const std::function<scenario::StepObserver(bus::InProcessBroker&)>& make) {
  ScenarioOutcome out;
  const auto file = scenario_file(n);
  const auto s = scenario::load_scenario(file);
  bus::InProcessBroker broker;
  const auto observer = make(broker);
  runtime::Options base;
  base.data_dir = ARTHUR_DATA_DIR;
  const auto start = std::chrono::steady_clock::now();
  out.run = scenario::run(s, [&](const std::string& id) { return broker.connect(id); }, base, observer);
  out.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.trace = scenario::join(out.run.trace);
  out.golden = read_file(scenario::golden_path(file));
  out.divergence = scenario::compare(out.golden, out.trace);
  for (const auto& f : out.run.failures) out.properties.fail(f);
  return out;
}

/// Start/stop/confirm/enable buttons, zone, task image and robot state.
inline ScenarioOutcome scenario1() {
  Check c;
  bool late_checked = false;
  std::unique_ptr<scene::SceneClient> late;
  auto make = [&](bus::InProcessBroker& broker) -> scenario::StepObserver {
   return [&](std::int64_t t, runtime::Runtime& rt) {
    auto& client = rt.client();
    if (!client.workstation()) return;
    const auto& ws = *client.workstation();
    const auto& world = client.world();
    const auto* status = client.node("robot-status");
    const auto robot = world.robots.find("ur5e");
    if (status != nullptr && robot != world.robots.end() &&
        status->data.value("run_state", std::string()) != to_string(robot->second.run_state)) {
      c.fail("t=" + std::to_string(t) + ": robot-status shows " + status->data.dump());
    }
    if (const auto* img = client.node("instructions")) {
      const Task* want = expected_current_task("op1", ws, world);
      const json shown = img->data.value("task", json(nullptr));
      if ((want == nullptr) != shown.is_null() || (want != nullptr && (shown != want->id ||
                                                                     img->data.value("description", "") != want->description))) {
        c.fail("t=" + std::to_string(t) + ": task image shows " + img->data.dump());
      }
    }
    if (const auto* zone = client.node("safety-zone")) {
      auto pts = world.zones.find("ur5e-reach");
      if (pts != world.zones.end() && zone->points != pts->second) {
        c.fail("t=" + std::to_string(t) + ": zone points differ from the published series");
      }
      if (zone->visible != client.report().is_active("robot-playing")) {
        c.fail("t=" + std::to_string(t) + ": zone visibility differs from its gating condition");
      }
    }
    // A fresh client joins after authoring; once the periodic zone feed has reached it,
    // it shows the same seven feedback nodes as the original client.
    if (t >= 9800 && !late) {
      late = std::make_unique<scene::SceneClient>(broker.connect("late-hmd"), ws.id, "late", rt.models());
      late->start(rt.now());
    }
    if (late) {
      while (late->pump() > 0) {
      }
      late->tick(rt.now());
    }
    if (t >= 10500 && late && !late_checked) {
      late_checked = true;
      if (late->nodes().size() != 7) c.fail("late client sees " + std::to_string(late->nodes().size()) + " nodes");
      if (late->dump_scene() != client.dump_scene()) {
        c.fail("late client scene differs:\n" + late->dump_scene() + "---\n" + client.dump_scene());
      }
      late.reset();  // its connection must not outlive the broker
    }
   };
  };
  auto out = run_checked(1, make);
  if (!late_checked) c.fail("late join never checked");
  const auto& tr = out.run.trace;
  // Lone green poke must not acknowledge.
  const auto lone = find_line(tr, 0, "> poke green");
  const auto first_ack = find_line(tr, 0, "action robot-acknowledge");
  const auto pair = find_line(tr, 0, "> poke blue green");
  if (lone == std::string::npos || pair == std::string::npos || first_ack == std::string::npos || first_ack < pair) {
    c.fail("acknowledge fired without the blue+green pair");
  }
  std::size_t acks = 0, toggles = 0, completes = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto t = trace_time(tr[i]);
    if (tr[i].find("> poke blue green") != std::string::npos) {
      const auto a = find_line(tr, i, "action robot-acknowledge");
      const auto start = find_line(tr, i, "active agent=ur5e");
      if (a == std::string::npos || trace_time(tr[a]) - t > 200 || start == std::string::npos ||
          trace_time(tr[start]) - t > 300) {
        c.fail("blue+green at " + std::to_string(t) + " did not start the next robot task");
      }
      ++acks;
    } else if (tr[i].find("> poke red") != std::string::npos) {
      const auto a = find_line(tr, i, "action robot-play-pause");
      const auto r = find_line(tr, i, "robot ur5e ");
      if (a == std::string::npos || r == std::string::npos || trace_time(tr[r]) - t > 200) {
        c.fail("red at " + std::to_string(t) + " did not toggle the robot");
      }
      ++toggles;
    } else if (tr[i].find("> poke blue yellow") != std::string::npos) {
      const auto a = find_line(tr, i, "action complete-task");
      const auto done = find_line(tr, i, "completed agent=op1");
      if (a == std::string::npos || done == std::string::npos || trace_time(tr[done]) - t > 200) {
        c.fail("blue+yellow at " + std::to_string(t) + " did not complete the operator task");
      }
      ++completes;
    }
  }
  if (acks != 2 || toggles != 5 || completes != 2) c.fail("unexpected timeline shape");
  for (const std::string state : {"robot ur5e playing", "robot ur5e paused", "robot ur5e stopped"}) {
    if (find_line(tr, 0, state) == std::string::npos) c.fail("robot state never reported: " + state);
  }
  if (find_line(tr, 0, "node safety-zone visible=1 data={} points=12") == std::string::npos ||
      find_line(tr, 0, "node safety-zone visible=0 data={} points=12") == std::string::npos) {
    c.fail("zone never shown and hidden with published points");
  }
  if (!c.ok) out.properties.fail(c.detail);
  return out;
}

/// Three motion intent previews; after the first selection exactly one is visible.
inline ScenarioOutcome scenario2() {
  Check c;
  const std::vector<std::string> ids = {"intent-path", "intent-waypoints", "intent-ghost"};
  bool selected = false;
  std::size_t switches_seen = 0;
  std::string last_visible;
  auto observer = [&](std::int64_t t, runtime::Runtime& rt) {
    auto& client = rt.client();
    int visible = 0;
    std::string which;
    for (const auto& id : ids) {
      const auto* n = client.node(id);
      if (n != nullptr && n->visible) {
        ++visible;
        which = id;
      }
    }
    if (visible > 0) selected = true;
    if (!selected) return;
    if (visible != 1) c.fail("t=" + std::to_string(t) + ": " + std::to_string(visible) + " previews visible");
    if (which != last_visible) {
      ++switches_seen;
      last_visible = which;
    }
  };
  auto out = run_checked(2, [&](bus::InProcessBroker&) { return scenario::StepObserver(observer); });
  // Every switch command shows the requested preview within 200 ms.
  const auto& tr = out.run.trace;
  const std::map<std::string, std::string> wanted = {
      {"> button variant-1", "node intent-path visible=1"},
      {"> button variant-2", "node intent-waypoints visible=1"},
      {"> speech show ghost", "node intent-ghost visible=1"}};
  std::size_t commands = 0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (const auto& [cmd, shown] : wanted) {
      if (tr[i].find(cmd) == std::string::npos) continue;
      ++commands;
      const auto j = find_line(tr, i, shown);
      if (j == std::string::npos || trace_time(tr[j]) - trace_time(tr[i]) > 200) {
        c.fail("'" + cmd + "' at " + std::to_string(trace_time(tr[i])) + " did not switch");
      }
    }
  }
  if (commands != 7 || switches_seen != 7) {
    c.fail("expected 7 switches, saw " + std::to_string(switches_seen) + " of " + std::to_string(commands));
  }
  if (!c.ok) out.properties.fail(c.detail);
  return out;
}

/// Pressure gauge value equals the scripted profile for every published sample of the task.
inline ScenarioOutcome scenario3() {
  Check c;
  const auto s = scenario::load_scenario(scenario_file(3));
  const auto& profile = s.workstation.tasks.at(0).sensor_profile.at("pressure");
  const auto& task = s.workstation.tasks.at(0).id;
  std::set<std::int64_t> seen;
  std::int64_t last_ts = -1;
  auto observer = [&](std::int64_t t, runtime::Runtime& rt) {
    auto& client = rt.client();
    const auto& world = client.world();
    auto r = world.robots.find("ur5e");
    if (r == world.robots.end() || r->second.timestamp_ms == last_ts) return;
    last_ts = r->second.timestamp_ms;
    if (r->second.task != task || r->second.task_sample < 0) return;
    const auto k = r->second.task_sample;
    const double want = profile[std::min<std::size_t>(static_cast<std::size_t>(k), profile.size() - 1)];
    const auto* gauge = client.node("pressure-gauge");
    if (gauge == nullptr || !gauge->data.at("value").is_number() || gauge->data["value"].get<double>() != want) {
      c.fail("t=" + std::to_string(t) + " sample " + std::to_string(k) + ": gauge " +
             (gauge ? gauge->data.dump() : "missing") + ", profile " + std::to_string(want));
    }
    seen.insert(k);
  };
  auto out = run_checked(3, [&](bus::InProcessBroker&) { return scenario::StepObserver(observer); });
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (seen.count(static_cast<std::int64_t>(k)) == 0) {
      c.fail("profile sample " + std::to_string(k) + " never shown");
      break;
    }
  }
  if (find_line(out.run.trace, 0, "task " + task + " completed") == std::string::npos) c.fail("sanding task never completed");
  if (!c.ok) out.properties.fail(c.detail);
  return out;
}

}  // namespace arthur::testing
