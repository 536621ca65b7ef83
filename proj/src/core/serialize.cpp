#include "arthur/core/serialize.hpp"

#include <fstream>
#include <sstream>

#include "arthur/core/error.hpp"
#include "arthur/core/registry.hpp"

namespace arthur {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::load, (path.empty() ? std::string("/") : path) + ": " + what);
}

const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing field");
  return *it;
}

std::string str(const json& j, const std::string& path, const char* key) {
  const auto& v = field(j, path, key);
  if (!v.is_string()) fail(path + "/" + key, "expected a string");
  return v.get<std::string>();
}

std::string opt_str(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) fail(path + "/" + key, "expected a string");
  return it->get<std::string>();
}

Pose pose_at(const json& j, const std::string& path, const char* key) {
  if (!j.contains(key)) return Pose::identity();
  try {
    return pose_from_json(j.at(key));
  } catch (const Error& e) {
    fail(path + "/" + key, e.detail());
  }
}

std::vector<std::string> str_list(const json& j, const std::string& path, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  if (!arr.is_array()) fail(path + "/" + key, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_string()) fail(path + "/" + key + "/" + std::to_string(i), "expected a string");
    out.push_back(arr[i].get<std::string>());
  }
  return out;
}

template <typename T, typename F>
std::map<std::string, T> read_map(const json& j, const std::string& path, const char* key, F&& reader) {
  std::map<std::string, T> out;
  if (!j.contains(key)) return out;
  const auto& arr = j.at(key);
  const std::string p = path + "/" + key;
  if (!arr.is_array()) fail(p, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string ip = p + "/" + std::to_string(i);
    T item = reader(arr[i], ip);
    if (!out.emplace(item.id, item).second) fail(ip + "/id", "duplicate id '" + item.id + "'");
  }
  return out;
}

template <typename T>
json write_map(const std::map<std::string, T>& m) {
  json arr = json::array();
  for (const auto& [id, v] : m) arr.push_back(to_json(v));
  return arr;
}

JointVector joints_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 6) fail(path, "expected 6 joint values");
  JointVector q{};
  for (std::size_t i = 0; i < 6; ++i) {
    if (!j[i].is_number()) fail(path + "/" + std::to_string(i), "expected a number");
    q[i] = j[i].get<double>();
  }
  return q;
}

}  // namespace

std::string canonical(const json& j) { return j.dump(2) + "\n"; }

json to_json(const Agent& a) {
  return {{"id", a.id},
          {"name", a.name},
          {"role", to_string(a.role)},
          {"skill_level", a.skill_level},
          {"robot_type", a.robot_type},
          {"tool", a.tool},
          {"mount_anchor", a.mount_anchor},
          {"mount_pose", pose_to_json(a.mount_pose)}};
}

Agent agent_from_json(const json& j, const std::string& path) {
  Agent a;
  a.id = str(j, path, "id");
  a.name = opt_str(j, path, "name");
  const std::string role = str(j, path, "role");
  if (role == "operator") {
    a.role = AgentRole::human_operator;
  } else if (role == "robot") {
    a.role = AgentRole::robot;
  } else {
    fail(path + "/role", "unknown role '" + role + "'");
  }
  if (j.contains("skill_level")) {
    if (!j["skill_level"].is_number_integer()) fail(path + "/skill_level", "expected an integer");
    a.skill_level = j["skill_level"].get<int>();
  }
  a.robot_type = opt_str(j, path, "robot_type");
  a.tool = opt_str(j, path, "tool");
  a.mount_anchor = opt_str(j, path, "mount_anchor");
  a.mount_pose = pose_at(j, path, "mount_pose");
  return a;
}

json to_json(const Anchor& a) {
  return {{"id", a.id},
          {"label", a.label},
          {"parent", {{"type", to_string(a.parent.type)}, {"ref", a.parent.ref}}},
          {"local_pose", pose_to_json(a.local_pose)}};
}

Anchor anchor_from_json(const json& j, const std::string& path) {
  Anchor a;
  a.id = str(j, path, "id");
  a.label = opt_str(j, path, "label");
  const auto& parent = field(j, path, "parent");
  const std::string ppath = path + "/parent";
  const std::string type = str(parent, ppath, "type");
  static constexpr std::array<AnchorParent::Type, 5> types = {
      AnchorParent::Type::tracker_root, AnchorParent::Type::anchor, AnchorParent::Type::user_head,
      AnchorParent::Type::user_hand_left, AnchorParent::Type::user_hand_right};
  bool matched = false;
  for (auto t : types) {
    if (to_string(t) == type) {
      a.parent.type = t;
      matched = true;
    }
  }
  if (!matched) fail(ppath + "/type", "unknown anchor parent type '" + type + "'");
  a.parent.ref = opt_str(parent, ppath, "ref");
  a.local_pose = pose_at(j, path, "local_pose");
  return a;
}

json to_json(const Tracker& t) {
  return {{"id", t.id}, {"label", t.label}, {"world_pose", pose_to_json(t.world_pose)}, {"root_anchor", t.root_anchor_id}};
}

Tracker tracker_from_json(const json& j, const std::string& path) {
  Tracker t;
  t.id = str(j, path, "id");
  t.label = opt_str(j, path, "label");
  t.world_pose = pose_at(j, path, "world_pose");
  t.root_anchor_id = str(j, path, "root_anchor");
  return t;
}

json to_json(const Item& i) { return {{"id", i.id}, {"name", i.name}, {"anchor", i.anchor}}; }

Item item_from_json(const json& j, const std::string& path) {
  return {str(j, path, "id"), opt_str(j, path, "name"), opt_str(j, path, "anchor")};
}

json to_json(const Task& t) {
  json program = json::array();
  for (const auto& q : t.program) program.push_back(q);
  json profile = json::object();
  for (const auto& [name, values] : t.sensor_profile) profile[name] = values;
  return {{"id", t.id},
          {"name", t.name},
          {"description", t.description},
          {"predecessors", t.predecessors},
          {"agent", t.agent},
          {"step_anchor", t.step_anchor},
          {"step_pose", pose_to_json(t.step_pose)},
          {"parts", t.parts},
          {"tools", t.tools},
          {"image", t.image},
          {"program", std::move(program)},
          {"sensor_profile", std::move(profile)}};
}

Task task_from_json(const json& j, const std::string& path) {
  Task t;
  t.id = str(j, path, "id");
  t.name = opt_str(j, path, "name");
  t.description = opt_str(j, path, "description");
  t.predecessors = str_list(j, path, "predecessors");
  t.agent = opt_str(j, path, "agent");
  t.step_anchor = opt_str(j, path, "step_anchor");
  t.step_pose = pose_at(j, path, "step_pose");
  t.parts = str_list(j, path, "parts");
  t.tools = str_list(j, path, "tools");
  t.image = opt_str(j, path, "image");
  if (j.contains("program")) {
    const auto& prog = j.at("program");
    if (!prog.is_array()) fail(path + "/program", "expected an array");
    for (std::size_t i = 0; i < prog.size(); ++i) {
      t.program.push_back(joints_from_json(prog[i], path + "/program/" + std::to_string(i)));
    }
  }
  if (j.contains("sensor_profile")) {
    const auto& prof = j.at("sensor_profile");
    if (!prof.is_object()) fail(path + "/sensor_profile", "expected an object");
    for (auto it = prof.begin(); it != prof.end(); ++it) {
      const std::string p = path + "/sensor_profile/" + it.key();
      if (!it->is_array()) fail(p, "expected an array of numbers");
      std::vector<double> values;
      for (const auto& v : *it) {
        if (!v.is_number()) fail(p, "expected an array of numbers");
        values.push_back(v.get<double>());
      }
      t.sensor_profile[it.key()] = std::move(values);
    }
  }
  return t;
}

json to_json(const ComponentDescriptor& d) {
  return {{"id", d.id},
          {"kind", d.kind},
          {"properties", d.properties},
          {"implicit", d.implicit},
          {"owner", d.owner},
          {"visibility", d.visibility ? json(*d.visibility) : json(nullptr)},
          {"enabled", d.enabled}};
}

ComponentDescriptor descriptor_from_json(const json& j, const std::string& path) {
  ComponentDescriptor d;
  d.id = str(j, path, "id");
  d.kind = str(j, path, "kind");
  if (builtin_registry().find(d.kind) == nullptr) fail(path + "/kind", "unknown component kind '" + d.kind + "'");
  if (j.contains("properties")) {
    if (!j["properties"].is_object()) fail(path + "/properties", "expected an object");
    d.properties = j["properties"];
  }
  if (j.contains("implicit")) {
    if (!j["implicit"].is_boolean()) fail(path + "/implicit", "expected a boolean");
    d.implicit = j["implicit"].get<bool>();
  }
  d.owner = opt_str(j, path, "owner");
  if (auto v = opt_str(j, path, "visibility"); !v.empty()) d.visibility = v;
  if (j.contains("enabled")) {
    if (!j["enabled"].is_boolean()) fail(path + "/enabled", "expected a boolean");
    d.enabled = j["enabled"].get<bool>();
  }
  return d;
}

json to_json(const Workstation& ws) {
  json components = {{"feedback", json::array()}, {"action", json::array()}, {"condition", json::array()}};
  for (const auto& [id, d] : ws.components) {
    components[std::string(to_string(category_of(d)))].push_back(to_json(d));
  }
  json tasks = json::array();
  for (const auto& t : ws.tasks) tasks.push_back(to_json(t));
  return {{"id", ws.id},
          {"name", ws.name},
          {"phase", to_string(ws.phase)},
          {"revision", ws.revision},
          {"next_serial", ws.next_serial},
          {"agents", write_map(ws.agents)},
          {"trackers", write_map(ws.trackers)},
          {"anchors", write_map(ws.anchors)},
          {"components", std::move(components)},
          {"tools", write_map(ws.tools)},
          {"parts", write_map(ws.parts)},
          {"tasks", std::move(tasks)}};
}

Workstation workstation_from_json(const json& j) {
  const std::string root;
  Workstation ws = Workstation::make(str(j, root, "id"), opt_str(j, root, "name"));
  if (j.contains("phase")) {
    auto phase = phase_from_string(str(j, root, "phase"));
    if (!phase) fail("/phase", "unknown phase");
    ws.phase = *phase;
  }
  if (j.contains("revision")) {
    if (!j["revision"].is_number_unsigned()) fail("/revision", "expected a non-negative integer");
    ws.revision = j["revision"].get<std::uint64_t>();
  }
  if (j.contains("next_serial")) {
    if (!j["next_serial"].is_number_unsigned()) fail("/next_serial", "expected a non-negative integer");
    ws.next_serial = j["next_serial"].get<std::uint64_t>();
  }
  ws.agents = read_map<Agent>(j, root, "agents", agent_from_json);
  ws.trackers = read_map<Tracker>(j, root, "trackers", tracker_from_json);
  for (auto& [id, a] : read_map<Anchor>(j, root, "anchors", anchor_from_json)) ws.anchors[id] = a;
  ws.tools = read_map<Item>(j, root, "tools", item_from_json);
  ws.parts = read_map<Item>(j, root, "parts", item_from_json);
  if (j.contains("components")) {
    const auto& comps = j["components"];
    if (!comps.is_object()) fail("/components", "expected an object");
    for (auto it = comps.begin(); it != comps.end(); ++it) {
      const std::string gpath = "/components/" + it.key();
      auto cat = category_from_string(it.key());
      if (!cat) fail(gpath, "unknown category '" + it.key() + "'");
      if (!it->is_array()) fail(gpath, "expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string ip = gpath + "/" + std::to_string(i);
        auto d = descriptor_from_json((*it)[i], ip);
        if (category_of(d) != *cat) fail(ip + "/kind", "kind '" + d.kind + "' is not a " + it.key());
        if (!ws.components.emplace(d.id, d).second) fail(ip + "/id", "duplicate id '" + d.id + "'");
      }
    }
  }
  if (j.contains("tasks")) {
    if (!j["tasks"].is_array()) fail("/tasks", "expected an array");
    for (std::size_t i = 0; i < j["tasks"].size(); ++i) {
      ws.tasks.push_back(task_from_json(j["tasks"][i], "/tasks/" + std::to_string(i)));
    }
  }
  return ws;
}

json to_json(const RobotState& s) {
  json sensors = json::object();
  for (const auto& [k, v] : s.sensors) sensors[k] = v;
  return {{"timestamp_ms", s.timestamp_ms},
          {"q", s.q},
          {"tcp", pose_to_json(s.tcp)},
          {"run_state", to_string(s.run_state)},
          {"moving", s.moving},
          {"move_mode", s.move_mode},
          {"assistance", s.assistance},
          {"waiting_for_ack", s.waiting_for_ack},
          {"task", s.task},
          {"progress", s.progress},
          {"task_sample", s.task_sample},
          {"sensors", std::move(sensors)}};
}

RobotState robot_state_from_json(const json& j, const std::string& path) {
  RobotState s;
  const auto& ts = field(j, path, "timestamp_ms");
  if (!ts.is_number_integer()) fail(path + "/timestamp_ms", "expected an integer");
  s.timestamp_ms = ts.get<std::int64_t>();
  s.q = joints_from_json(field(j, path, "q"), path + "/q");
  s.tcp = pose_at(j, path, "tcp");
  auto rs = run_state_from_string(str(j, path, "run_state"));
  if (!rs) fail(path + "/run_state", "unknown run state");
  s.run_state = *rs;
  s.moving = j.value("moving", false);
  s.move_mode = j.value("move_mode", false);
  s.assistance = j.value("assistance", false);
  s.waiting_for_ack = j.value("waiting_for_ack", false);
  s.task = opt_str(j, path, "task");
  s.progress = j.value("progress", 0.0);
  s.task_sample = j.value("task_sample", std::int64_t{-1});
  if (j.contains("sensors") && j["sensors"].is_object()) {
    for (auto it = j["sensors"].begin(); it != j["sensors"].end(); ++it) {
      if (it->is_number()) s.sensors[it.key()] = it->get<double>();
    }
  }
  return s;
}

json to_json(const InputEvent& e) {
  return {{"type", to_string(e.type)},
          {"target", e.target},
          {"source", e.source},
          {"timestamp_ms", e.timestamp_ms},
          {"unresolved", e.unresolved}};
}

InputEvent input_event_from_json(const json& j, const std::string& path) {
  InputEvent e;
  auto type = input_type_from_string(str(j, path, "type"));
  if (!type) fail(path + "/type", "unknown input type");
  e.type = *type;
  e.target = opt_str(j, path, "target");
  e.source = opt_str(j, path, "source");
  const auto& ts = field(j, path, "timestamp_ms");
  if (!ts.is_number_integer()) fail(path + "/timestamp_ms", "expected an integer");
  e.timestamp_ms = ts.get<std::int64_t>();
  e.unresolved = j.value("unresolved", false);
  return e;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::load, file.string() + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::load, tmp.string() + ": cannot write");
    out << text;
  }
  std::filesystem::rename(tmp, file);
}

Workstation load_workstation(const std::filesystem::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::load, file.string() + ": " + e.what());
  }
  try {
    return workstation_from_json(j);
  } catch (const Error& e) {
    throw Error(ErrorCode::load, file.string() + " " + e.detail());
  }
}

void save_workstation(const std::filesystem::path& file, const Workstation& ws) {
  write_file_atomic(file, canonical(to_json(ws)));
}

}  // namespace arthur
