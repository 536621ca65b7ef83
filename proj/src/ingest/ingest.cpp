#include "arthur/ingest/ingest.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>
#include <sstream>

#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::ingest {

namespace {

struct Element {
  std::string name;
  std::map<std::string, std::string> attrs;
  std::string text;
  std::vector<std::unique_ptr<Element>> children;
  Element* parent = nullptr;
  std::string path;  // e.g. /process/bop/operation[2]
};

struct ParseState {
  std::unique_ptr<Element> root;
  Element* current = nullptr;
};

void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto* st = static_cast<ParseState*>(data);
  auto e = std::make_unique<Element>();
  e->name = name;
  for (int i = 0; attrs[i] != nullptr; i += 2) e->attrs[attrs[i]] = attrs[i + 1];
  e->parent = st->current;
  Element* raw = e.get();
  if (st->current == nullptr) {
    raw->path = "/" + raw->name;
    st->root = std::move(e);
  } else {
    const auto same = std::count_if(st->current->children.begin(), st->current->children.end(),
                                    [&](const auto& c) { return c->name == raw->name; });
    raw->path = st->current->path + "/" + raw->name + "[" + std::to_string(same + 1) + "]";
    st->current->children.push_back(std::move(e));
  }
  st->current = raw;
}

void on_end(void* data, const XML_Char*) {
  auto* st = static_cast<ParseState*>(data);
  st->current = st->current->parent;
}

void on_text(void* data, const XML_Char* s, int len) {
  auto* st = static_cast<ParseState*>(data);
  if (st->current != nullptr) st->current->text.append(s, static_cast<std::size_t>(len));
}

std::unique_ptr<Element> parse_xml(const std::string& xml) {
  ParseState st;
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(XML_ParserCreate("UTF-8"),
                                                                                       &XML_ParserFree);
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);
  XML_SetCharacterDataHandler(parser.get(), on_text);
  if (XML_Parse(parser.get(), xml.data(), static_cast<int>(xml.size()), 1) == XML_STATUS_ERROR) {
    std::ostringstream msg;
    msg << "line " << XML_GetCurrentLineNumber(parser.get()) << ", column " << XML_GetCurrentColumnNumber(parser.get())
        << ": " << XML_ErrorString(XML_GetErrorCode(parser.get()));
    throw Error(ErrorCode::parse, msg.str());
  }
  return std::move(st.root);
}

[[noreturn]] void fail(const Element& e, const std::string& what) {
  throw Error(ErrorCode::validation, e.path + what);
}

const std::string& required(const Element& e, const std::string& attr) {
  auto it = e.attrs.find(attr);
  if (it == e.attrs.end() || it->second.empty()) fail(e, "/@" + attr + ": missing");
  return it->second;
}

std::string optional(const Element& e, const std::string& attr) {
  auto it = e.attrs.find(attr);
  return it == e.attrs.end() ? std::string() : it->second;
}

void only_attrs(const Element& e, std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : e.attrs) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
      fail(e, "/@" + k + ": unknown attribute");
    }
  }
}

std::vector<double> numbers(const Element& e, const std::string& attr, std::size_t expected) {
  std::istringstream in(required(e, attr));
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(e, "/@" + attr + ": '" + tok + "' is not a number");
    }
  }
  if (expected > 0 && out.size() != expected) {
    fail(e, "/@" + attr + ": expected " + std::to_string(expected) + " numbers, got " + std::to_string(out.size()));
  }
  return out;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Task convert_operation(const Element& op, std::set<std::string>& agents) {
  only_attrs(op, {"id", "name", "agent"});
  Task t;
  t.id = stable_id(required(op, "id"));
  t.name = optional(op, "name");
  if (auto a = optional(op, "agent"); !a.empty()) {
    t.agent = stable_id(a);
    agents.insert(t.agent);
  }
  for (const auto& c : op.children) {
    const auto& e = *c;
    if (e.name == "description") {
      t.description = trimmed(e.text);
    } else if (e.name == "predecessor") {
      only_attrs(e, {"ref"});
      t.predecessors.push_back(stable_id(required(e, "ref")));
    } else if (e.name == "uses") {
      only_attrs(e, {"part", "tool"});
      const auto part = optional(e, "part");
      const auto tool = optional(e, "tool");
      if (part.empty() == tool.empty()) fail(e, ": needs exactly one of @part or @tool");
      if (!part.empty()) t.parts.push_back(stable_id(part));
      if (!tool.empty()) t.tools.push_back(stable_id(tool));
    } else if (e.name == "image") {
      only_attrs(e, {"src"});
      t.image = required(e, "src");
    } else if (e.name == "step") {
      only_attrs(e, {"anchor", "position", "orientation"});
      t.step_anchor = optional(e, "anchor");
      Vec3 p = Vec3::Zero();
      Quat q = Quat::Identity();
      if (e.attrs.count("position") > 0) {
        const auto v = numbers(e, "position", 3);
        p = Vec3(v[0], v[1], v[2]);
      }
      if (e.attrs.count("orientation") > 0) {
        const auto v = numbers(e, "orientation", 4);
        q = Quat(v[0], v[1], v[2], v[3]);
      }
      try {
        t.step_pose = Pose(p, q);
      } catch (const Error& err) {
        fail(e, ": " + err.detail());
      }
    } else if (e.name == "waypoint") {
      only_attrs(e, {"q"});
      const auto v = numbers(e, "q", 6);
      JointVector q;
      std::copy(v.begin(), v.end(), q.begin());
      t.program.push_back(q);
    } else if (e.name == "sensor") {
      only_attrs(e, {"name", "values"});
      t.sensor_profile[required(e, "name")] = numbers(e, "values", 0);
    } else {
      fail(e, ": unknown element");
    }
  }
  return t;
}

Item convert_item(const Element& e) {
  only_attrs(e, {"id", "name", "anchor"});
  return {stable_id(required(e, "id")), optional(e, "name"), optional(e, "anchor")};
}

}  // namespace

std::string stable_id(const std::string& source_id) {
  std::string out;
  for (unsigned char c : trimmed(source_id)) {
    const auto l = static_cast<char>(std::tolower(c));
    out += (std::isalnum(c) || l == '-' || l == '_' || l == '.') ? l : '-';
  }
  return out;
}

ProcessDocument convert(const std::string& xml) {
  const auto root = parse_xml(xml);
  if (root->name != "process") fail(*root, ": root element must be <process>");
  only_attrs(*root, {"id", "name"});
  ProcessDocument d;
  d.id = stable_id(required(*root, "id"));
  d.name = optional(*root, "name");
  std::set<std::string> agents;
  for (const auto& c : root->children) {
    const auto& section = *c;
    if (section.name == "agents") {
      for (const auto& a : section.children) {
        if (a->name != "agent") fail(*a, ": unknown element");
        only_attrs(*a, {"id", "role"});
        const auto role = required(*a, "role");
        if (role != "robot" && role != "operator") fail(*a, "/@role: expected robot or operator");
        agents.insert(stable_id(required(*a, "id")));
      }
    } else if (section.name == "bom") {
      for (const auto& item : section.children) {
        if (item->name == "part" || item->name == "tool") {
          auto i = convert_item(*item);
          auto& bom = item->name == "part" ? d.parts : d.tools;
          if (!bom.emplace(i.id, i).second) fail(*item, "/@id: duplicate " + item->name + " id '" + i.id + "'");
        } else {
          fail(*item, ": unknown element");
        }
      }
    } else if (section.name == "bop") {
      for (const auto& op : section.children) {
        if (op->name != "operation") fail(*op, ": unknown element");
        d.tasks.push_back(convert_operation(*op, agents));
      }
    } else {
      fail(section, ": unknown element");
    }
  }
  d.agents.assign(agents.begin(), agents.end());
  return d;
}

std::vector<Violation> validate(const ProcessDocument& d) { return validate_bop(d.tasks, d.parts, d.tools); }

json to_json(const ProcessDocument& d) {
  json tasks = json::array();
  for (const auto& t : d.tasks) tasks.push_back(arthur::to_json(t));
  json parts = json::array();
  for (const auto& [id, i] : d.parts) parts.push_back(arthur::to_json(i));
  json tools = json::array();
  for (const auto& [id, i] : d.tools) tools.push_back(arthur::to_json(i));
  return {{"id", d.id}, {"name", d.name}, {"agents", d.agents}, {"parts", parts}, {"tools", tools}, {"tasks", tasks}};
}

ProcessDocument process_from_json(const json& j) {
  ProcessDocument d;
  try {
    d.id = j.at("id").get<std::string>();
    d.name = j.value("name", std::string());
    d.agents = j.value("agents", std::vector<std::string>{});
    for (std::size_t i = 0; i < j.at("parts").size(); ++i) {
      auto item = item_from_json(j["parts"][i], "/parts/" + std::to_string(i));
      d.parts.emplace(item.id, item);
    }
    for (std::size_t i = 0; i < j.at("tools").size(); ++i) {
      auto item = item_from_json(j["tools"][i], "/tools/" + std::to_string(i));
      d.tools.emplace(item.id, item);
    }
    for (std::size_t i = 0; i < j.at("tasks").size(); ++i) {
      d.tasks.push_back(task_from_json(j["tasks"][i], "/tasks/" + std::to_string(i)));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::load, std::string("process document: ") + e.what());
  }
  return d;
}

IngestResult ingest_file(const std::filesystem::path& in, const std::filesystem::path& out) {
  IngestResult r;
  ProcessDocument d;
  try {
    d = convert(read_file(in));
  } catch (const Error& e) {
    r.exit_code = e.code() == ErrorCode::parse ? 2 : 1;
    r.messages.push_back(in.string() + ": " + e.what());
    return r;
  }
  const auto violations = validate(d);
  if (!violations.empty()) {
    r.exit_code = 1;
    for (const auto& v : violations) r.messages.push_back(in.string() + ": " + v.property + ": " + v.message);
    return r;
  }
  write_file_atomic(out, canonical(to_json(d)));
  r.messages.push_back(in.string() + ": " + std::to_string(d.tasks.size()) + " tasks, " +
                       std::to_string(d.parts.size()) + " parts, " + std::to_string(d.tools.size()) + " tools, " +
                       std::to_string(d.agents.size()) + " agents hinted -> " + out.string());
  return r;
}

}  // namespace arthur::ingest
