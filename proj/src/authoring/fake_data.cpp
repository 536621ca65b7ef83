#include "arthur/authoring/fake_data.hpp"

#include <cmath>
#include <random>

#include "arthur/bus/topic.hpp"
#include "arthur/core/anchors.hpp"
#include "arthur/core/error.hpp"

namespace arthur::authoring {

namespace {

const Agent* pick_robot(const Workstation& ws, const std::string& wanted) {
  if (!wanted.empty()) {
    const auto* a = ws.agent(wanted);
    if (a == nullptr || a->role != AgentRole::robot) throw Error(ErrorCode::unknown_agent, "no robot '" + wanted + "'");
    return a;
  }
  for (const auto& [id, a] : ws.agents) {
    if (a.role == AgentRole::robot) return &a;
  }
  return nullptr;
}

struct Arc {
  double radius, height, start, sweep;
};

Arc draw_arc(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.3, 0.6), h(0.2, 0.5), s(0.0, 2 * M_PI), w(M_PI / 2, M_PI);
  Arc a{};
  a.radius = r(rng);
  a.height = h(rng);
  a.start = s(rng);
  a.sweep = w(rng);
  return a;
}

Vec3 arc_point(const Pose& base, const Arc& arc, double u) {
  const double phi = arc.start + arc.sweep * u;
  return base.transform(Vec3(arc.radius * std::cos(phi), arc.radius * std::sin(phi), arc.height));
}

}  // namespace

std::vector<FakeMessage> generate_fake_data(const Workstation& ws, const std::string& kind, const FakeOptions& options) {
  const auto* robot = pick_robot(ws, options.agent);
  const Pose base = robot != nullptr ? robot_base_pose(*robot, ws, WorldState{}) : Pose::identity();
  const std::string agent = robot != nullptr ? robot->id : "";
  std::mt19937_64 rng(options.seed);

  if (kind == "zones" || kind == "zone") {
    json points = json::array();
    for (int k = 0; k < kFakeZonePoints; ++k) {
      const double th = 2 * M_PI * k / kFakeZonePoints;
      points.push_back(vec3_to_json(base.transform(Vec3(kFakeZoneRadius * std::cos(th), kFakeZoneRadius * std::sin(th), 0))));
    }
    return {{bus::topics::zone(ws.id, options.zone_id), {{"zone_id", options.zone_id}, {"points", points}}}};
  }
  if (kind == "path") {
    const auto arc = draw_arc(rng);
    json samples = json::array();
    for (int i = 0; i < kFakePathSamples; ++i) {
      samples.push_back({{"t_ms", i * kFakePathStepMs},
                         {"position", vec3_to_json(arc_point(base, arc, double(i) / (kFakePathSamples - 1)))}});
    }
    return {{bus::topics::fake(ws.id, "path"), {{"agent", agent}, {"samples", samples}}}};
  }
  if (kind == "waypoints" || kind == "waypoint") {
    const auto arc = draw_arc(rng);
    json points = json::array();
    for (int i = 0; i < 6; ++i) points.push_back(vec3_to_json(arc_point(base, arc, i / 5.0)));
    return {{bus::topics::fake(ws.id, "waypoints"), {{"agent", agent}, {"points", points}}}};
  }
  if (kind == "messages" || kind == "message") {
    static const std::vector<std::string> texts = {"Check the clamp before starting.", "Robot will move next.",
                                                   "Please fetch the next part.", "Wear safety glasses.",
                                                   "Sanding in progress."};
    std::uniform_int_distribution<std::size_t> pick(0, texts.size() - 1);
    return {{bus::topics::fake(ws.id, "messages"), {{"text", texts[pick(rng)]}, {"seed", options.seed}}}};
  }
  throw Error(ErrorCode::unsupported_kind, "no fake data for '" + kind + "' (path, waypoints, zones, messages)");
}

}  // namespace arthur::authoring
