#pragma once

#include <string>
#include <vector>

#include "arthur/core/model.hpp"
#include "arthur/core/registry.hpp"

namespace arthur {

struct Violation {
  enum class Code {
    unknown_kind,
    unknown_property,
    missing,
    type_mismatch,
    out_of_range,
    not_in_domain,
    dangling_reference,
    duplicate_id,
    cycle,
  };
  Code code;
  std::string property;  // empty for descriptor-level problems
  std::string message;
  std::string target;  // dangling references: "anchor", "condition", "feedback", "task", ...
};

std::string_view to_string(Violation::Code code);

/// Type-checks one property value against its schema; references are resolved in `ws`.
std::vector<Violation> check_property(const PropertySchema& schema, const json& value, const Workstation& ws);

/// Empty result means the descriptor is valid against `registry` within `ws`.
std::vector<Violation> validate_component(const ComponentDescriptor& desc, const Workstation& ws,
                                          const Registry& registry = builtin_registry());

/// Task graph checks: unique ids, resolvable predecessors/parts/tools, acyclic precedence.
/// `property` holds a path such as "tasks/3/parts/0".
std::vector<Violation> validate_bop(const std::vector<Task>& tasks, const std::map<std::string, Item>& parts,
                                    const std::map<std::string, Item>& tools);

/// One precedence cycle as a closed id list (first == last), empty if the graph is acyclic.
std::vector<std::string> find_task_cycle(const std::vector<Task>& tasks);

/// Conditions referenced through condition-kind properties of condition `d`, in schema order.
std::vector<std::string> condition_operands(const ComponentDescriptor& d, const Registry& registry = builtin_registry());

/// One cycle among condition operands as a closed id list, empty if acyclic.
std::vector<std::string> find_condition_cycle(const Workstation& ws, const Registry& registry = builtin_registry());

/**
 * Whole-workstation integrity. Component violations are reported with the
 * property path "components/<id>/<property>". With `tolerate_component_refs`,
 * dangling references from one component to another are not reported.
 */
std::vector<Violation> validate_workstation(const Workstation& ws, bool tolerate_component_refs = false,
                                            const Registry& registry = builtin_registry());

/// True if the violation is a dangling reference to a feedback or condition.
bool is_component_reference(const Violation& v);

bool is_color(const std::string& s);

std::string describe(const std::vector<Violation>& violations);

}  // namespace arthur
