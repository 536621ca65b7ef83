#include "arthur/core/model.hpp"

#include <algorithm>
#include <array>

#include "arthur/core/error.hpp"
#include "arthur/core/registry.hpp"

namespace arthur {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 3> kCategory = {"feedback", "action", "condition"};
constexpr std::array<std::string_view, 2> kRole = {"operator", "robot"};
constexpr std::array<std::string_view, 5> kParent = {"tracker-root", "anchor", "user-head", "user-hand-left",
                                                     "user-hand-right"};
constexpr std::array<std::string_view, 3> kPhase = {"configuration", "refinement", "operation"};
constexpr std::array<std::string_view, 3> kRunState = {"playing", "paused", "stopped"};
constexpr std::array<std::string_view, 4> kTaskStatus = {"pending", "ready", "active", "completed"};
constexpr std::array<std::string_view, 6> kInput = {"poke", "gaze", "pinch", "button", "speech", "message"};
constexpr std::array<std::string_view, 3> kBody = {"head", "hand-left", "hand-right"};
constexpr std::array<std::string_view, 18> kErrors = {
    "invalid-pose", "unresolved-anchor", "anchor-cycle", "not-found",   "validation",       "unknown-id",
    "type-mismatch", "dangling-reference", "phase",      "precedence", "immutable",        "cycle",
    "transport",    "parse",             "load",         "unsupported-kind", "unknown-agent", "invalid-argument"};

}  // namespace

std::string_view to_string(ErrorCode code) { return kErrors[static_cast<std::size_t>(code)]; }
std::string_view to_string(Category c) { return kCategory[static_cast<std::size_t>(c)]; }
std::string_view to_string(AgentRole r) { return kRole[static_cast<std::size_t>(r)]; }
std::string_view to_string(AnchorParent::Type t) { return kParent[static_cast<std::size_t>(t)]; }
std::string_view to_string(Phase p) { return kPhase[static_cast<std::size_t>(p)]; }
std::string_view to_string(RunState s) { return kRunState[static_cast<std::size_t>(s)]; }
std::string_view to_string(TaskStatus s) { return kTaskStatus[static_cast<std::size_t>(s)]; }
std::string_view to_string(InputType t) { return kInput[static_cast<std::size_t>(t)]; }
std::string_view to_string(BodyPart b) { return kBody[static_cast<std::size_t>(b)]; }

std::optional<Category> category_from_string(std::string_view s) { return lookup<Category>(kCategory, s); }
std::optional<Phase> phase_from_string(std::string_view s) { return lookup<Phase>(kPhase, s); }
std::optional<RunState> run_state_from_string(std::string_view s) { return lookup<RunState>(kRunState, s); }
std::optional<TaskStatus> task_status_from_string(std::string_view s) {
  return lookup<TaskStatus>(kTaskStatus, s);
}
std::optional<InputType> input_type_from_string(std::string_view s) { return lookup<InputType>(kInput, s); }
std::optional<BodyPart> body_part_from_string(std::string_view s) { return lookup<BodyPart>(kBody, s); }

Workstation Workstation::make(std::string id, std::string name) {
  Workstation ws;
  ws.id = std::move(id);
  ws.name = std::move(name);
  const std::array<std::pair<std::string_view, AnchorParent::Type>, 3> body = {{
      {kUserHead, AnchorParent::Type::user_head},
      {kUserHandLeft, AnchorParent::Type::user_hand_left},
      {kUserHandRight, AnchorParent::Type::user_hand_right},
  }};
  for (const auto& [aid, type] : body) {
    Anchor a;
    a.id = std::string(aid);
    a.label = std::string(aid);
    a.parent.type = type;
    ws.anchors.emplace(a.id, a);
  }
  return ws;
}

const ComponentDescriptor* Workstation::component(std::string_view cid) const {
  auto it = components.find(std::string(cid));
  return it == components.end() ? nullptr : &it->second;
}

const Task* Workstation::task(std::string_view tid) const {
  auto it = std::find_if(tasks.begin(), tasks.end(), [&](const Task& t) { return t.id == tid; });
  return it == tasks.end() ? nullptr : &*it;
}

const Agent* Workstation::agent(std::string_view aid) const {
  auto it = agents.find(std::string(aid));
  return it == agents.end() ? nullptr : &it->second;
}

std::vector<const ComponentDescriptor*> Workstation::components_of(Category category) const {
  std::vector<const ComponentDescriptor*> out;
  const auto& reg = builtin_registry();
  for (const auto& [cid, desc] : components) {
    const auto* spec = reg.find(desc.kind);
    if (spec != nullptr && spec->category == category) out.push_back(&desc);
  }
  return out;
}

}  // namespace arthur
