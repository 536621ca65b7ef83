#include "arthur/core/pose.hpp"

#include <cmath>

#include "arthur/core/error.hpp"

namespace arthur {

namespace {

bool finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

Pose::Pose(const Vec3& position, const Quat& orientation)
    : position_(position), orientation_(orientation) {
  if (!finite(position_) || !orientation_.coeffs().allFinite()) {
    throw Error(ErrorCode::invalid_pose, "non-finite pose component");
  }
  const double norm = orientation_.norm();
  if (std::abs(norm - 1.0) > kUnitQuatTolerance) {
    throw Error(ErrorCode::invalid_pose, "orientation is not a unit quaternion (norm " +
                                             std::to_string(norm) + ")");
  }
  // Only re-normalize visible drift; exact round-trips of serialized values stay bit-identical.
  if (std::abs(norm - 1.0) > 1e-12) orientation_.normalize();
}

Pose Pose::translation(double x, double y, double z) { return {Vec3(x, y, z), Quat::Identity()}; }

Pose Pose::rotation(const Vec3& axis, double angle_rad) {
  if (!axis.allFinite() || !std::isfinite(angle_rad) || axis.norm() == 0.0) {
    throw Error(ErrorCode::invalid_pose, "degenerate rotation axis or angle");
  }
  return {Vec3::Zero(), Quat(Eigen::AngleAxisd(angle_rad, axis.normalized()))};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = orientation_.toRotationMatrix();
  m.topRightCorner<3, 1>() = position_;
  return m;
}

Pose compose(const Pose& parent, const Pose& child) {
  Quat q = parent.orientation() * child.orientation();
  q.normalize();
  return {parent.transform(child.position()), q};
}

Pose inverse(const Pose& pose) {
  const Quat qi = pose.orientation().conjugate();
  return {-(qi * pose.position()), qi};
}

double rotation_angle_between(const Quat& a, const Quat& b) {
  const double d = std::min(1.0, std::abs(a.dot(b)));
  return 2.0 * std::acos(d);
}

double pose_distance(const Pose& a, const Pose& b) {
  const double dp = (a.position() - b.position()).cwiseAbs().maxCoeff();
  const auto& qa = a.orientation().coeffs();
  const auto& qb = b.orientation().coeffs();
  const double dq = std::min((qa - qb).cwiseAbs().maxCoeff(), (qa + qb).cwiseAbs().maxCoeff());
  return std::max(dp, dq);
}

nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::type_mismatch, "expected [x,y,z]");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::type_mismatch, "vector component is not a number");
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) throw Error(ErrorCode::invalid_pose, "non-finite vector component");
  return v;
}

nlohmann::json pose_to_json(const Pose& pose) {
  const Quat& q = pose.orientation();
  return {{"position", vec3_to_json(pose.position())},
          {"orientation", nlohmann::json::array({q.w(), q.x(), q.y(), q.z()})}};
}

Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("position") || !j.contains("orientation")) {
    throw Error(ErrorCode::type_mismatch, "expected {position, orientation}");
  }
  const Vec3 p = vec3_from_json(j.at("position"));
  const auto& o = j.at("orientation");
  if (!o.is_array() || o.size() != 4) {
    throw Error(ErrorCode::type_mismatch, "orientation must be [w,x,y,z]");
  }
  for (const auto& c : o) {
    if (!c.is_number()) throw Error(ErrorCode::type_mismatch, "orientation component is not a number");
  }
  return {p, Quat(o[0].get<double>(), o[1].get<double>(), o[2].get<double>(), o[3].get<double>())};
}

}  // namespace arthur
