// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "mecp/geometry.hpp"
#include "mecp/rng.hpp"

namespace mecp {

enum class MobilityModel { static_model, constant_velocity, random_waypoint };

struct MobilityConfig {
  MobilityModel model{MobilityModel::random_waypoint};
  double v_min{0.0};       // m/s
  double v_max{5.0};       // m/s
  double pause_time{0.0};  // seconds at each waypoint
  double world_w{200.0};   // meters
  double world_h{200.0};

  friend bool operator==(const MobilityConfig&, const MobilityConfig&) = default;
};

struct Kinematics {
  Vec2 position;
  Vec2 velocity;
  std::optional<Vec2> waypoint;
  double pause_until{0.0};  // simulation time, seconds
};

// Advance one node by dt. random_waypoint draws, on arrival and after the
// pause, a fresh target (x, y uniform in world) and speed (uniform in
// [v_min, v_max]) -- three uniform01 draws in that order. constant_velocity
// reflects specularly off the world boundary. static is the identity.
Kinematics step_kinematics(const Kinematics& k, const MobilityConfig& cfg, double now,
                           double dt, Rng& rng);

// Euclidean norm of the velocity difference, m/s.
double relative_speed(const Kinematics& a, const Kinematics& b);

// Velocity as reported by the onboard sensor: true velocity plus independent
// zero-mean Gaussian noise per axis. noise_std = 0 draws nothing and returns
// the exact velocity.
Vec2 sense_velocity(const Kinematics& k, double noise_std, Rng& rng);

}  // namespace mecp
