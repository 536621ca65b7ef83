#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arthur/core/model.hpp"

namespace arthur {

/// The twelve property kinds a component may declare.
enum class PropertyKind {
  boolean,
  integer,
  floating,
  text,
  anchor,
  pose,
  vector3,
  condition,
  color,
  agent,
  enumeration,
  multi_enumeration,
};

inline constexpr std::size_t kPropertyKindCount = 12;

std::string_view to_string(PropertyKind k);
std::optional<PropertyKind> property_kind_from_string(std::string_view s);

/// What a `text` property refers to, when it names another entity.
enum class Reference { none, feedback, task, part, tool };

struct PropertySchema {
  std::string name;
  PropertyKind kind = PropertyKind::text;
  bool required = false;
  std::vector<std::string> domain;  // enumeration kinds
  std::optional<double> min;
  std::optional<double> max;
  Reference reference = Reference::none;
  json default_value;  // null when absent
};

struct ComponentSpec {
  std::string kind_id;
  Category category = Category::feedback;
  std::string group;
  std::string name;
  std::string icon;
  std::string description;
  std::vector<PropertySchema> properties;
  /// Condition kind auto-created alongside this feedback, if interactive.
  std::string implicit_condition;
  /// Placement is authored through `anchor` + `pose` properties.
  [[nodiscard]] bool positionable() const;
  [[nodiscard]] const PropertySchema* property(std::string_view name) const;
};

class Registry {
 public:
  explicit Registry(std::vector<ComponentSpec> specs);

  [[nodiscard]] const std::vector<ComponentSpec>& specs() const noexcept { return specs_; }
  [[nodiscard]] const ComponentSpec* find(std::string_view kind_id) const;
  /// Throws Error(not_found) for unknown kinds.
  [[nodiscard]] const ComponentSpec& at(std::string_view kind_id) const;
  [[nodiscard]] std::size_t count(Category category) const;

  /// Returns a copy extended with one more spec. Kind ids must stay unique.
  [[nodiscard]] Registry with(ComponentSpec spec) const;

 private:
  std::vector<ComponentSpec> specs_;
};

/// The built-in 20 feedback, 10 action and 18 condition kinds.
const Registry& builtin_registry();

/// Category of a stored component; throws not_found for unknown kinds.
Category category_of(const ComponentDescriptor& desc, const Registry& reg = builtin_registry());

json spec_to_json(const ComponentSpec& spec);

}  // namespace arthur
