#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "arthur/core/model.hpp"
#include "arthur/runtime/runtime.hpp"

namespace arthur::scenario {

/// Periodic publisher of "a series of points around the robot" on zone/<zone>.
/// The ring radius follows the TCP reach so the wall grows with the arm.
struct ZoneFeed {
  std::string zone;
  std::string agent;
  std::int64_t period_ms = 200;
  int points = 12;
  double margin = 0.25;
};

struct TimelineEntry {
  std::int64_t at_ms = 0;  // relative to the start of operation
  json command;            // {"do": ..., ...}
};

/**
 * A scripted run: workstation, configuration requests issued before the
 * operation phase, and a timed list of inputs. Trace lines are emitted for
 * fired actions, task status changes, robot run-state changes and watched
 * scene nodes.
 */
struct Scenario {
  std::string name;
  std::string description;
  Workstation workstation;
  std::vector<json> setup;  // authoring requests {"op", "args"}
  std::vector<TimelineEntry> timeline;
  std::vector<std::string> watch;  // node ids; empty watches every node
  std::int64_t duration_ms = 10000;
  std::optional<ZoneFeed> zone_feed;
  json options = json::object();  // runtime overrides: step_ms, robot_rate_hz, require_ack, scene_clients
};

/// Throws Error(load) naming the offending JSON pointer.
Scenario scenario_from_json(const json& j);
Scenario load_scenario(const std::filesystem::path& file);
/// <data>/scenarios/scenario<n>.json for a bare number, else the path itself.
std::filesystem::path scenario_path(const std::string& name_or_path, const std::filesystem::path& data_dir);
/// The reviewed trace next to a scenario file (same stem, .trace).
std::filesystem::path golden_path(const std::filesystem::path& scenario_file);

struct Run {
  std::vector<std::string> trace;
  std::vector<std::string> failures;  // setup requests that were rejected
  std::int64_t operation_start_ms = 0;
};

/// Called after every step with the time relative to the start of operation.
using StepObserver = std::function<void(std::int64_t t_ms, runtime::Runtime& rt)>;

runtime::Options apply_options(const Scenario& s, runtime::Options base);

Run run(const Scenario& s, const runtime::ConnectionFactory& connect, runtime::Options base = {},
        const StepObserver& observer = {});

std::string join(const std::vector<std::string>& lines);

struct Divergence {
  std::size_t line = 0;  // 1-based
  std::string expected;
  std::string actual;
};

/// First differing line, or nullopt when both traces are identical.
std::optional<Divergence> compare(const std::string& expected, const std::string& actual);

}  // namespace arthur::scenario
