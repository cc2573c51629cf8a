// SPDX-License-Identifier: Apache-2.0
#include "mecp/mobility.hpp"

#include <algorithm>
#include <cmath>

namespace mecp {

namespace {

Vec2 clamp_to_world(Vec2 p, const MobilityConfig& cfg) {
  return {std::clamp(p.x, 0.0, cfg.world_w), std::clamp(p.y, 0.0, cfg.world_h)};
}

Kinematics step_constant_velocity(Kinematics k, const MobilityConfig& cfg, double dt) {
  Vec2 p = k.position + k.velocity * dt;
  // Specular reflection; repeat in case dt carries past both walls.
  for (int guard = 0; guard < 8; ++guard) {
    bool bounced = false;
    if (p.x < 0.0) { p.x = -p.x; k.velocity.x = -k.velocity.x; bounced = true; }
    if (p.x > cfg.world_w) { p.x = 2.0 * cfg.world_w - p.x; k.velocity.x = -k.velocity.x; bounced = true; }
    if (p.y < 0.0) { p.y = -p.y; k.velocity.y = -k.velocity.y; bounced = true; }
    if (p.y > cfg.world_h) { p.y = 2.0 * cfg.world_h - p.y; k.velocity.y = -k.velocity.y; bounced = true; }
    if (!bounced) break;
  }
  k.position = clamp_to_world(p, cfg);
  return k;
}

Kinematics step_random_waypoint(Kinematics k, const MobilityConfig& cfg, double now,
                                double dt, Rng& rng) {
  if (now < k.pause_until) return k;  // resting at a waypoint

  if (!k.waypoint) {
    const double wx = rng.uniform01() * cfg.world_w;
    const double wy = rng.uniform01() * cfg.world_h;
    const double speed = cfg.v_min + rng.uniform01() * (cfg.v_max - cfg.v_min);
    k.waypoint = Vec2{wx, wy};
    const Vec2 d = *k.waypoint - k.position;
    const double dist = norm(d);
    k.velocity = dist > 0.0 && speed > 0.0 ? (speed / dist) * d : Vec2{};
  }

  const double dist = distance(k.position, *k.waypoint);
  const double travel = norm(k.velocity) * dt;
  if (travel >= dist || norm(k.velocity) == 0.0) {
    // Arrived within this step (or degenerate zero speed): snap and pause.
    const double time_to_arrive = norm(k.velocity) > 0.0 ? dist / norm(k.velocity) : 0.0;
    k.position = *k.waypoint;
    k.waypoint.reset();
    k.velocity = Vec2{};
    k.pause_until = now + time_to_arrive + cfg.pause_time;
  } else {
    k.position = clamp_to_world(k.position + k.velocity * dt, cfg);
  }
  return k;
}

}  // namespace

Kinematics step_kinematics(const Kinematics& k, const MobilityConfig& cfg, double now,
                           double dt, Rng& rng) {
  if (dt <= 0.0) throw std::invalid_argument("step_kinematics: dt must be positive");
  switch (cfg.model) {
    case MobilityModel::static_model:
      return k;
    case MobilityModel::constant_velocity:
      return step_constant_velocity(k, cfg, dt);
    case MobilityModel::random_waypoint:
      return step_random_waypoint(k, cfg, now, dt, rng);
  }
  return k;
}

double relative_speed(const Kinematics& a, const Kinematics& b) {
  return norm(a.velocity - b.velocity);
}

Vec2 sense_velocity(const Kinematics& k, double noise_std, Rng& rng) {
  if (noise_std < 0.0) throw std::invalid_argument("sense_velocity: negative noise_std");
  if (noise_std == 0.0) return k.velocity;
  return {k.velocity.x + noise_std * rng.gaussian(),
          k.velocity.y + noise_std * rng.gaussian()};
}

}  // namespace mecp
