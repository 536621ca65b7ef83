#include "arthur/preview/service.hpp"

#include "arthur/bus/topic.hpp"
#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::preview {

PreviewService::PreviewService(std::unique_ptr<bus::Connection> connection, std::string workstation_id,
                               std::optional<std::filesystem::path> directory)
    : Service(kName, std::move(workstation_id), std::move(connection)), dir_(std::move(directory)) {}

void PreviewService::start(std::int64_t now_ms) {
  const auto& ws = workstation_id();
  if (dir_ && std::filesystem::exists(*dir_)) {
    for (const auto& entry : std::filesystem::recursive_directory_iterator(*dir_)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        recorder_.adopt(recording_from_json(json::parse(read_file(entry.path()))));
      }
    }
  }
  const auto robot_prefix = std::string(bus::topics::kRoot) + "/" + ws + "/robot/";
  bus().subscribe(bus::topics::robot_state(ws, "+"), [this, robot_prefix](const bus::Envelope& e) {
    if (e.payload.is_null()) return;
    const auto agent = e.topic.substr(robot_prefix.size(), e.topic.size() - robot_prefix.size() - 6);
    try {
      recorder_.on_robot_sample(agent, robot_state_from_json(e.payload));
    } catch (const Error&) {
      // malformed samples are not recordable
    }
  });
  const auto task_prefix = std::string(bus::topics::kRoot) + "/" + ws + "/task/";
  bus().subscribe(bus::topics::task_status(ws, "+"), [this, task_prefix](const bus::Envelope& e) {
    if (!e.payload.is_object()) return;
    const auto task = e.topic.substr(task_prefix.size(), e.topic.size() - task_prefix.size() - 7);
    auto status = task_status_from_string(e.payload.value("status", std::string()));
    if (!status) return;
    // Retained replays describe the past; only live transitions bound a recording.
    if (e.retained && *status == TaskStatus::completed) return;
    const auto ts = e.payload.value("timestamp_ms", this->now_ms());
    if (auto r = recorder_.on_task_status(task, *status, e.payload.value("agent", std::string()), ts)) store(*r);
  });
  serve(bus::topics::rpc_request(ws, kName), bus::topics::rpc_response(ws, kName),
        [this](const std::string& op, const json& args) { return handle(op, args); });
  Service::start(now_ms);
}

void PreviewService::store(const Recording& r) {
  if (dir_) {
    const auto path = recording_path(*dir_, r.agent, r.task);
    std::filesystem::create_directories(path.parent_path());
    write_file_atomic(path, canonical(to_json(r)));
  }
}

json PreviewService::handle(const std::string& op, const json& args) {
  if (op == "get") {
    const auto* r = recorder_.get(args.value("agent", std::string()), args.value("task", std::string()));
    return r != nullptr ? to_json(*r) : json(nullptr);
  }
  if (op == "list") {
    json list = json::array();
    for (const auto& [key, r] : recorder_.recordings()) {
      list.push_back({{"agent", r.agent}, {"task", r.task}, {"revision", r.revision}, {"samples", r.samples.size()}});
    }
    return list;
  }
  throw Error(ErrorCode::invalid_argument, "unknown op '" + op + "'");
}

json PreviewService::status_detail() const { return {{"recordings", recorder_.recordings().size()}}; }

}  // namespace arthur::preview
