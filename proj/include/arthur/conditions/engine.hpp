#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "arthur/core/model.hpp"
#include "arthur/core/registry.hpp"

namespace arthur::conditions {

inline constexpr std::int64_t kDefaultWindowMs = 200;
inline constexpr double kDefaultGazeRadius = 0.15;

enum class Edge { rising, falling, while_active };
std::string_view to_string(Edge e);
std::optional<Edge> edge_from_string(std::string_view s);

/// One action fired by a condition edge.
struct Firing {
  std::string action;
  std::string kind;
  std::string condition;
  Edge edge = Edge::rising;
  json properties;
  std::int64_t timestamp_ms = 0;
};

struct EdgeRecord {
  std::string condition;
  bool rising = true;
};

struct EvaluationReport {
  std::int64_t timestamp_ms = 0;
  std::map<std::string, bool> active;          // every condition id
  std::map<std::string, std::string> invalid;  // condition or action id -> reason
  std::map<std::string, std::string> notes;    // runtime diagnostics (e.g. untracked hand)
  std::vector<EdgeRecord> edges;
  std::vector<Firing> fired;

  [[nodiscard]] bool is_active(const std::string& id) const;
};

json to_json(const EvaluationReport& r);
json to_json(const Firing& f);

/// Event-window test used by the input-driven kinds: now - window <= t <= now.
bool in_window(std::int64_t event_ms, std::int64_t now_ms, std::int64_t window_ms);

/// Strict proximity rule: within means d < threshold, beyond means d > threshold.
bool proximity_active(double distance, double threshold, bool beyond);

/// Closed convex hull of `points` projected on xy contains `p`'s xy.
bool inside_convex_hull_xy(const Vec3& p, const std::vector<Vec3>& points);

/// Ray from `head` along its local +z hits the sphere.
bool gaze_hits(const Pose& head, const Vec3& center, double radius);

/**
 * Activation of one condition. Logic kinds read their operands from
 * `operands`. Throws Error(dangling_reference) when a referenced id is gone.
 * `note`, when given, receives a runtime diagnostic for inactive results.
 */
bool evaluate(const ComponentDescriptor& condition, const Workstation& ws, const WorldState& world,
              const std::map<std::string, bool>& operands, std::string* note = nullptr,
              const Registry& registry = builtin_registry());

/// Conditions in evaluation order (operands first). Throws Error(cycle) naming the cycle.
std::vector<std::string> evaluation_order(const Workstation& ws, const Registry& registry = builtin_registry());

/**
 * Evaluates every condition, derives edges against `previous` (absent ids count
 * as inactive) and fires the actions bound to them.
 */
EvaluationReport evaluate_all(const Workstation& ws, const WorldState& world, const EvaluationReport* previous,
                              const Registry& registry = builtin_registry());

/**
 * Whether a feedback is shown: it must exist and be enabled, and its visibility
 * condition, if any, must be valid and active in `report`. Fails closed.
 */
bool visibility(const std::string& feedback_id, const Workstation& ws, const EvaluationReport& report,
                std::string* diagnostic = nullptr);

}  // namespace arthur::conditions
