#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "arthur/core/model.hpp"

namespace arthur::robot {

struct DhRow {
  double a = 0;
  double d = 0;
  double alpha = 0;
  double theta_offset = 0;
  double q_min = 0;
  double q_max = 0;
  double max_speed = 0;  // rad/s
};

struct RobotModel {
  std::string name;
  std::array<DhRow, 6> joints{};
};

/**
 * Text table: '#' comments, one "model <name>" line and six
 * "joint a d alpha theta_offset q_min q_max max_speed" rows.
 * Throws Error(parse) with the line number.
 */
RobotModel parse_robot_model(const std::string& text);
RobotModel load_robot_model(const std::filesystem::path& file);

/// Flange pose in the robot base frame. Throws Error(invalid_argument) for non-finite q.
Pose fk(const RobotModel& model, const JointVector& q);

}  // namespace arthur::robot
