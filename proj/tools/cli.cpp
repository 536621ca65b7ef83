#include "cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "arthur/authoring/authoring.hpp"
#include "arthur/bus/inprocess.hpp"
#include "arthur/bus/mqtt.hpp"
#include "arthur/bus/service.hpp"
#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"
#include "arthur/ingest/ingest.hpp"
#include "arthur/runtime/runtime.hpp"
#include "arthur/scenario/scenario.hpp"

namespace arthur::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct Globals {
  std::string config;
  std::string broker;
  bool in_process = false;
  std::uint64_t seed = 1;
  std::string report;
};

struct Config {
  Workstation ws;
  runtime::Options options;
};

/// {"workstation": path|object, "store": path, "recordings": path, "robot_rate_hz", "require_ack", "step_ms"}.
/// Relative paths resolve against the config file; an existing store wins over the workstation.
Config load_config(const Globals& g) {
  const fs::path file = g.config.empty() ? runtime::default_data_dir() / "config" / "default.json" : fs::path(g.config);
  const json j = [&] {
    try {
      return json::parse(read_file(file));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse, file.string() + ": " + e.what());
    }
  }();
  const auto dir = file.parent_path();
  auto rel = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : dir / p; };
  Config c;
  c.options.seed = g.seed;
  c.options.robot_rate_hz = j.value("robot_rate_hz", c.options.robot_rate_hz);
  c.options.require_ack = j.value("require_ack", c.options.require_ack);
  c.options.step_ms = j.value("step_ms", c.options.step_ms);
  if (j.contains("store")) c.options.store = rel(j["store"].get<std::string>());
  if (j.contains("recordings")) c.options.recordings_dir = rel(j["recordings"].get<std::string>());
  if (c.options.store && fs::exists(*c.options.store)) {
    c.ws = load_workstation(*c.options.store);
  } else if (!j.contains("workstation")) {
    throw Error(ErrorCode::load, file.string() + ": no workstation");
  } else if (j["workstation"].is_string()) {
    c.ws = load_workstation(rel(j["workstation"].get<std::string>()));
  } else {
    c.ws = workstation_from_json(j["workstation"]);
  }
  return c;
}

std::string broker_url(const Globals& g) {
  if (!g.broker.empty()) return g.broker;
  if (auto env = bus::broker_from_env()) return *env;
  throw Error(ErrorCode::transport, "no broker configured: set ARTHUR_BROKER or pass --broker (or use --in-process)");
}

void write_report(const Globals& g, const json& report) {
  if (!g.report.empty()) write_file_atomic(g.report, canonical(report));
}

/// Service names `up` waits for: the fixed services plus one simulator per robot agent.
std::set<std::string> expected_services(const Workstation& ws) {
  std::set<std::string> names = {"authoring", "condition-engine", "assembly", "preview"};
  for (const auto& [id, a] : ws.agents) {
    if (a.role == AgentRole::robot) names.insert("robot-sim-" + id);
  }
  return names;
}

int cmd_up(const Globals& g, std::int64_t duration_ms, std::ostream& out, std::ostream& err) {
  Config cfg = load_config(g);
  const auto ws_id = cfg.ws.id;
  const auto expected = expected_services(cfg.ws);
  std::unique_ptr<bus::InProcessBroker> local;
  std::optional<bus::BrokerAddress> address;
  runtime::ConnectionFactory connect;
  if (g.in_process) {
    local = std::make_unique<bus::InProcessBroker>();
    connect = [&](const std::string& id) { return local->connect(id); };
  } else {
    const auto url = broker_url(g);
    address = bus::BrokerAddress::parse(url);
    connect = [&](const std::string& id) { return bus::connect_mqtt(*address, "arthur-" + ws_id + "-" + id); };
  }
  std::unique_ptr<runtime::Runtime> rt;
  std::unique_ptr<bus::Connection> monitor;
  try {
    monitor = connect("supervisor");
    rt = std::make_unique<runtime::Runtime>(cfg.ws, connect, cfg.options);
  } catch (const Error& e) {
    err << "startup failed: " << e.what() << "\n";
    if (address) err << "broker from ARTHUR_BROKER/--broker: " << address->str() << "\n";
    write_report(g, {{"command", "up"}, {"ok", false}, {"error", e.what()}});
    return kStartup;
  }
  std::map<std::string, std::string> states;
  bool down_requested = false;
  monitor->subscribe(bus::topics::service_status(ws_id, "+"), [&](const bus::Envelope& e) {
    if (!e.payload.is_object()) return;
    states[e.payload.value("service", std::string())] = e.payload.value("state", std::string());
  });
  monitor->subscribe(bus::topics::service_command(ws_id, "supervisor"), [&](const bus::Envelope& e) {
    if (!e.retained && e.payload.is_object() && e.payload.value("command", std::string()) == "down") down_requested = true;
  });
  auto healthy = [&] {
    return std::all_of(expected.begin(), expected.end(), [&](const std::string& s) {
      auto it = states.find(s);
      return it != states.end() && it->second == "up";
    });
  };
  auto report_status = [&](bool ok) {
    json services = json::object();
    for (const auto& s : expected) {
      auto it = states.find(s);
      const std::string st = it == states.end() ? "missing" : it->second;
      services[s] = st;
      out << "  " << (st == "up" ? "[ok]  " : "[FAIL]") << " " << s << " " << st << "\n";
    }
    write_report(g, {{"command", "up"}, {"ok", ok}, {"workstation", ws_id}, {"services", services}});
  };
  const auto started = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
  };
  rt->start();
  // Virtual time on the in-process bus; wall time against a real broker.
  auto step = [&] {
    if (g.in_process) {
      rt->run_for(cfg.options.step_ms);
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(cfg.options.step_ms));
      rt->advance_to(elapsed_ms());
    }
    monitor->poll();
  };
  monitor->poll();
  std::int64_t waited = 0;
  while (!healthy() && waited < 5000) {
    step();
    waited += cfg.options.step_ms;
  }
  const bool ok = healthy();
  out << "workstation " << ws_id << ": " << (ok ? "all services up" : "services not healthy after 5 s") << "\n";
  report_status(ok);
  if (!ok) {
    rt->stop();
    return kStartup;
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto until = duration_ms < 0 ? std::numeric_limits<std::int64_t>::max() : rt->now() + duration_ms;
  while (!g_interrupted && !down_requested && rt->now() < until) step();
  rt->stop();
  monitor->poll();
  out << "workstation " << ws_id << ": stopped" << (down_requested ? " (down requested)" : "") << "\n";
  return kOk;
}

int cmd_down(const Globals& g, std::ostream& out, std::ostream& err) {
  if (g.in_process) {
    out << "in-process services live inside `arthur up`; nothing to stop\n";
    return kOk;
  }
  const Config cfg = load_config(g);
  std::unique_ptr<bus::Connection> c;
  try {
    c = bus::connect_mqtt(bus::BrokerAddress::parse(broker_url(g)), "arthur-" + cfg.ws.id + "-down");
  } catch (const Error& e) {
    // No broker means nothing can be running against it.
    err << "note: " << e.what() << "\n";
    out << "nothing to stop\n";
    return kOk;
  }
  c->publish(bus::topics::service_command(cfg.ws.id, "supervisor"), {{"command", "down"}});
  c->poll();
  out << "down requested for workstation " << cfg.ws.id << "\n";
  return kOk;
}

int cmd_phase(const Globals& g, const std::string& name, std::ostream& out, std::ostream& err) {
  const auto phase = phase_from_string(name);
  if (!phase) {
    err << "invalid phase '" << name << "' (expected configuration, refinement or operation)\n";
    return kFail;
  }
  Config cfg = load_config(g);
  if (g.in_process) {
    authoring::Authoring model(cfg.ws);
    if (cfg.options.store) model.persist_to(*cfg.options.store);
    const auto rev = model.set_phase(*phase);
    out << "phase " << name << " (revision " << rev << ")" << (cfg.options.store ? "" : ", not persisted: no store")
        << "\n";
    write_report(g, {{"command", "phase"}, {"phase", name}, {"revision", rev}});
    return kOk;
  }
  std::unique_ptr<bus::Connection> c;
  try {
    c = bus::connect_mqtt(bus::BrokerAddress::parse(broker_url(g)), "arthur-" + cfg.ws.id + "-phase");
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kStartup;
  }
  bus::RpcClient rpc(*c, bus::topics::rpc_request(cfg.ws.id, "authoring"), bus::topics::rpc_response(cfg.ws.id, "authoring"));
  const auto id = rpc.call("set_phase", {{"phase", name}});
  const auto deadline = Clock::now() + std::chrono::seconds(2);
  while (!rpc.response(id) && Clock::now() < deadline) {
    c->poll();
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  const auto r = rpc.response(id);
  if (!r) {
    err << "authoring service did not answer within 2 s (is `arthur up` running?)\n";
    return kStartup;
  }
  if (!r->value("ok", false)) {
    err << "phase change rejected: " << r->at("error").dump() << "\n";
    return kFail;
  }
  out << "phase " << name << " (revision " << r->at("result").value("revision", 0) << ")\n";
  write_report(g, {{"command", "phase"}, {"phase", name}, {"result", r->at("result")}});
  return kOk;
}

int cmd_scenario(const Globals& g, const std::string& which, bool update_golden, std::ostream& out, std::ostream& err) {
  const auto data = runtime::default_data_dir();
  const auto file = scenario::scenario_path(which, data);
  scenario::Scenario s;
  try {
    s = scenario::load_scenario(file);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kStartup;
  }
  runtime::Options base;
  base.seed = g.seed;
  base.data_dir = data;
  bus::InProcessBroker broker;
  const auto started = Clock::now();
  scenario::Run r;
  try {
    r = scenario::run(s, [&](const std::string& id) { return broker.connect(id); }, base);
  } catch (const Error& e) {
    err << "scenario " << s.name << " failed to start: " << e.what() << "\n";
    return kStartup;
  }
  const auto wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
  if (!r.failures.empty()) {
    for (const auto& f : r.failures) err << f << "\n";
    write_report(g, {{"command", "scenario"}, {"scenario", s.name}, {"ok", false}, {"failures", r.failures}});
    return kStartup;
  }
  const auto text = scenario::join(r.trace);
  const auto golden = scenario::golden_path(file);
  if (update_golden) {
    write_file_atomic(golden, text);
    out << "wrote " << golden.string() << " (" << r.trace.size() << " lines)\n";
    return kOk;
  }
  out << text;
  if (!fs::exists(golden)) {
    err << "no expected trace at " << golden.string() << "\n";
    return kFail;
  }
  const auto diff = scenario::compare(read_file(golden), text);
  json report = {{"command", "scenario"}, {"scenario", s.name}, {"ok", !diff}, {"lines", r.trace.size()},
                 {"wall_ms", wall_ms}};
  if (diff) {
    err << "trace diverges at line " << diff->line << "\n  expected: " << diff->expected << "\n  actual:   " << diff->actual
        << "\n";
    report["divergence"] = {{"line", diff->line}, {"expected", diff->expected}, {"actual", diff->actual}};
  }
  out << "scenario " << s.name << ": " << (diff ? "FAIL" : "PASS") << " (" << r.trace.size() << " trace lines, "
      << wall_ms << " ms)\n";
  write_report(g, report);
  return diff ? kFail : kOk;
}

int cmd_ingest(const Globals& g, const std::string& in, const std::string& out_file, std::ostream& out,
               std::ostream& err) {
  const auto r = ingest::ingest_file(in, out_file);
  for (const auto& m : r.messages) (r.exit_code == 0 ? out : err) << m << "\n";
  write_report(g, {{"command", "ingest"}, {"input", in}, {"exit_code", r.exit_code}, {"messages", r.messages}});
  return r.exit_code;
}

int cmd_broker(int port, const std::string& bind, std::int64_t duration_ms, std::ostream& out, std::ostream& err) {
  std::unique_ptr<bus::MqttBroker> b;
  try {
    b = std::make_unique<bus::MqttBroker>(static_cast<std::uint16_t>(port), bind);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kStartup;
  }
  out << "broker listening on " << bind << ":" << b->port() << "\n" << std::flush;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const auto started = Clock::now();
  while (!g_interrupted) {
    if (duration_ms >= 0 && Clock::now() - started >= std::chrono::milliseconds(duration_ms)) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  b->stop();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"ARTHUR authoring and orchestration platform", "arthur"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Workstation config file (default <data>/config/default.json)");
  app.add_option("--broker", g.broker, "MQTT broker URL; defaults to $ARTHUR_BROKER");
  app.add_flag("--in-process", g.in_process, "Use the in-process bus instead of an external broker");
  app.add_option("--seed", g.seed, "Seed for fake data and randomized inputs");
  app.add_option("--report", g.report, "Write a JSON report to this path");

  std::int64_t duration_ms = -1;
  auto* up = app.add_subcommand("up", "Start all services and wait until their heartbeats are green");
  up->add_option("--duration-ms", duration_ms, "Stop after this long instead of waiting for `down`");
  app.add_subcommand("down", "Ask a running `arthur up` to stop");
  std::string phase_name;
  auto* phase = app.add_subcommand("phase", "Switch the workflow phase");
  phase->add_option("phase", phase_name, "configuration | refinement | operation")->required();
  std::string which;
  bool update_golden = false;
  auto* scen = app.add_subcommand("scenario", "Run a scripted scenario and compare its trace");
  scen->add_option("scenario", which, "1, 2, 3 or a scenario file")->required();
  scen->add_flag("--update-golden", update_golden, "Rewrite the expected trace instead of comparing");
  std::string in, out_file;
  auto* ing = app.add_subcommand("ingest", "Convert a process XML file into the canonical JSON");
  ing->add_option("input", in, "Process XML")->required();
  ing->add_option("-o,--output", out_file, "Canonical JSON output")->required();
  int port = 1883;
  std::string bind = "127.0.0.1";
  auto* brk = app.add_subcommand("broker", "Run the bundled MQTT broker");
  brk->add_option("--port", port, "TCP port (0 picks one)");
  brk->add_option("--bind", bind, "Bind address");
  brk->add_option("--duration-ms", duration_ms, "Stop after this long");
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kStartup;
  }
  try {
    if (*up) return cmd_up(g, duration_ms, out, err);
    if (app.got_subcommand("down")) return cmd_down(g, out, err);
    if (*phase) return cmd_phase(g, phase_name, out, err);
    if (*scen) return cmd_scenario(g, which, update_golden, out, err);
    if (*ing) return cmd_ingest(g, in, out_file, out, err);
    if (*brk) return cmd_broker(port, bind, duration_ms, out, err);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kStartup;
  }
  return kStartup;
}

}  // namespace arthur::cli
