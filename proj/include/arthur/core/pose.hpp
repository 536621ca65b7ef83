#pragma once

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

namespace arthur {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/**
 * Rigid transform: position in meters, unit quaternion orientation (w,x,y,z).
 *
 * Rotations are active; compose(parent, child) expresses `child` in the
 * parent frame, so the result maps child-local points to parent-frame points:
 *   p_parent = parent.position + parent.orientation * p_child
 *
 * Non-finite values and non-unit quaternions are rejected at construction.
 */
class Pose {
 public:
  Pose() : position_(Vec3::Zero()), orientation_(Quat::Identity()) {}
  Pose(const Vec3& position, const Quat& orientation);

  static Pose identity() { return {}; }
  static Pose translation(double x, double y, double z);
  static Pose rotation(const Vec3& axis, double angle_rad);

  [[nodiscard]] const Vec3& position() const noexcept { return position_; }
  [[nodiscard]] const Quat& orientation() const noexcept { return orientation_; }

  [[nodiscard]] Vec3 transform(const Vec3& local_point) const {
    return position_ + orientation_ * local_point;
  }

  [[nodiscard]] Eigen::Matrix4d matrix() const;

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position_ == b.position_ && a.orientation_.coeffs() == b.orientation_.coeffs();
  }

 private:
  Vec3 position_;
  Quat orientation_;
};

Pose compose(const Pose& parent, const Pose& child);
Pose inverse(const Pose& pose);

/// Largest absolute componentwise difference, treating q and -q as equal.
double pose_distance(const Pose& a, const Pose& b);

/// Angle of the relative rotation between two orientations, in radians.
double rotation_angle_between(const Quat& a, const Quat& b);

/// Tolerance accepted for quaternion norm on input.
inline constexpr double kUnitQuatTolerance = 1e-6;

// JSON form: {"position":[x,y,z],"orientation":[w,x,y,z]}
nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

}  // namespace arthur
