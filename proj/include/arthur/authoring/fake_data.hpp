#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "arthur/core/model.hpp"

namespace arthur::authoring {

struct FakeOptions {
  std::string agent;                  // robot to center on; first robot when empty
  std::string zone_id = "fake-zone";  // zones only
  std::uint64_t seed = 1;
};

struct FakeMessage {
  std::string topic;
  json payload;
};

inline constexpr int kFakeZonePoints = 16;
inline constexpr double kFakeZoneRadius = 1.0;
inline constexpr int kFakePathSamples = 50;
inline constexpr std::int64_t kFakePathStepMs = 40;

/**
 * Synthetic data for visual testing, deterministic in `seed`.
 *  - "zones": ring of 16 points, radius 1 m, in the robot base's xy-plane.
 *  - "path": 50-sample arc around the robot base, 40 ms apart.
 *  - "waypoints": 6 points on such an arc.
 *  - "messages": one text message.
 * Singular forms are accepted. Other kinds throw Error(unsupported_kind).
 */
std::vector<FakeMessage> generate_fake_data(const Workstation& ws, const std::string& kind, const FakeOptions& options);

}  // namespace arthur::authoring
