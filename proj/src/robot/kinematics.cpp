#include "arthur/robot/kinematics.hpp"

#include <cmath>
#include <sstream>

#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"

namespace arthur::robot {

RobotModel parse_robot_model(const std::string& text) {
  RobotModel m;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::size_t rows = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::parse, "robot model line " + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string key;
    if (!(words >> key)) continue;
    if (key == "model") {
      if (!(words >> m.name)) fail("model needs a name");
    } else if (key == "joint") {
      if (rows == m.joints.size()) fail("more than six joint rows");
      auto& r = m.joints[rows];
      if (!(words >> r.a >> r.d >> r.alpha >> r.theta_offset >> r.q_min >> r.q_max >> r.max_speed)) {
        fail("joint rows need 7 numbers");
      }
      if (r.max_speed <= 0 || r.q_min >= r.q_max) fail("joint limits must be ordered and speeds positive");
      ++rows;
    } else {
      fail("unknown keyword '" + key + "'");
    }
    std::string extra;
    if (words >> extra) fail("trailing text '" + extra + "'");
  }
  if (rows != m.joints.size()) throw Error(ErrorCode::parse, "robot model has " + std::to_string(rows) + " joint rows, expected 6");
  if (m.name.empty()) throw Error(ErrorCode::parse, "robot model lacks a model line");
  return m;
}

RobotModel load_robot_model(const std::filesystem::path& file) { return parse_robot_model(read_file(file)); }

Pose fk(const RobotModel& model, const JointVector& q) {
  Pose p;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) throw Error(ErrorCode::invalid_argument, "joint " + std::to_string(i) + " is not finite");
    const auto& r = model.joints[i];
    const double theta = q[i] + r.theta_offset;
    const Quat rot = Quat(Eigen::AngleAxisd(theta, Vec3::UnitZ())) * Quat(Eigen::AngleAxisd(r.alpha, Vec3::UnitX()));
    p = compose(p, Pose(Vec3(r.a * std::cos(theta), r.a * std::sin(theta), r.d), rot.normalized()));
  }
  return p;
}

}  // namespace arthur::robot
