// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "mecp/mobility.hpp"

using namespace mecp;

namespace {

MobilityConfig rwp_cfg() {
  MobilityConfig cfg;
  cfg.model = MobilityModel::random_waypoint;
  cfg.v_min = 1.0;
  cfg.v_max = 5.0;
  cfg.pause_time = 2.0;
  cfg.world_w = 200.0;
  cfg.world_h = 200.0;
  return cfg;
}

}  // namespace

TEST_CASE("static model is the identity") {
  MobilityConfig cfg;
  cfg.model = MobilityModel::static_model;
  Rng rng(1);
  Kinematics k;
  k.position = {12.5, 80.0};
  k.velocity = {3.0, -1.0};  // ignored
  auto k2 = step_kinematics(k, cfg, 0.0, 10.0, rng);
  CHECK(k2.position.x == 12.5);
  CHECK(k2.position.y == 80.0);
}

TEST_CASE("constant velocity moves linearly inside the world") {
  MobilityConfig cfg;
  cfg.model = MobilityModel::constant_velocity;
  Rng rng(1);
  Kinematics k;
  k.position = {10.0, 10.0};
  k.velocity = {2.0, 1.0};
  auto k2 = step_kinematics(k, cfg, 0.0, 3.0, rng);
  CHECK(k2.position.x == doctest::Approx(16.0));
  CHECK(k2.position.y == doctest::Approx(13.0));
  CHECK(k2.velocity.x == 2.0);
}

TEST_CASE("constant velocity reflects specularly off the boundary") {
  MobilityConfig cfg;
  cfg.model = MobilityModel::constant_velocity;
  cfg.world_w = cfg.world_h = 100.0;
  Rng rng(1);
  Kinematics k;
  k.position = {98.0, 50.0};
  k.velocity = {4.0, 0.0};
  // Unreflected endpoint 102 -> mirrored to 98, x velocity flips sign.
  auto k2 = step_kinematics(k, cfg, 0.0, 1.0, rng);
  CHECK(k2.position.x == doctest::Approx(98.0));
  CHECK(k2.velocity.x == doctest::Approx(-4.0));
  CHECK(k2.velocity.y == 0.0);

  k.position = {1.0, 1.0};
  k.velocity = {-3.0, -2.0};
  // x: -2 -> 2; y: -1 -> 1; both components flip.
  auto k3 = step_kinematics(k, cfg, 0.0, 1.0, rng);
  CHECK(k3.position.x == doctest::Approx(2.0));
  CHECK(k3.position.y == doctest::Approx(1.0));
  CHECK(k3.velocity.x == doctest::Approx(3.0));
  CHECK(k3.velocity.y == doctest::Approx(2.0));
}

TEST_CASE("random waypoint leg matches an independent replay of the draws") {
  MobilityConfig cfg = rwp_cfg();
  const std::uint64_t seed = 20240917;

  // Oracle: replay the documented 3-draw sequence on a twin stream.
  Rng twin(seed);
  const double wx = twin.uniform01() * cfg.world_w;
  const double wy = twin.uniform01() * cfg.world_h;
  const double speed = cfg.v_min + twin.uniform01() * (cfg.v_max - cfg.v_min);

  Rng rng(seed);
  Kinematics k;
  k.position = {100.0, 100.0};
  auto k2 = step_kinematics(k, cfg, 0.0, 1.0, rng);

  REQUIRE(k2.waypoint.has_value());
  CHECK(k2.waypoint->x == wx);
  CHECK(k2.waypoint->y == wy);
  CHECK(norm(k2.velocity) == doctest::Approx(speed).epsilon(1e-12));
  // Velocity points at the waypoint.
  const Vec2 d = *k2.waypoint - k.position;
  const double cross = d.x * k2.velocity.y - d.y * k2.velocity.x;
  CHECK(cross == doctest::Approx(0.0).epsilon(1e-9));
  // One second of travel toward the waypoint.
  CHECK(distance(k2.position, k.position) == doctest::Approx(speed).epsilon(1e-9));
}

TEST_CASE("random waypoint snaps on arrival and pauses") {
  MobilityConfig cfg = rwp_cfg();
  Rng rng(3);
  Kinematics k;
  k.position = {50.0, 50.0};
  k.waypoint = Vec2{50.0, 51.0};
  k.velocity = {0.0, 2.0};  // arrives after 0.5 s, dt = 1 s overshoots
  auto k2 = step_kinematics(k, cfg, 10.0, 1.0, rng);
  CHECK_FALSE(k2.waypoint.has_value());
  CHECK(k2.position.y == 51.0);
  CHECK(norm(k2.velocity) == 0.0);
  CHECK(k2.pause_until == doctest::Approx(10.0 + 0.5 + cfg.pause_time));

  // While pausing, nothing moves and nothing is drawn.
  auto k3 = step_kinematics(k2, cfg, 11.0, 1.0, rng);
  CHECK(k3.position.y == 51.0);
  CHECK_FALSE(k3.waypoint.has_value());
}

TEST_CASE("property: positions stay inside the world over many steps") {
  for (auto model : {MobilityModel::constant_velocity, MobilityModel::random_waypoint}) {
    MobilityConfig cfg = rwp_cfg();
    cfg.model = model;
    cfg.pause_time = 0.5;
    Rng rng(777);
    Kinematics k;
    k.position = {5.0, 195.0};
    k.velocity = {4.0, 3.0};
    double now = 0.0;
    for (int i = 0; i < 100000; ++i) {
      k = step_kinematics(k, cfg, now, 0.25, rng);
      now += 0.25;
      REQUIRE(k.position.x >= 0.0);
      REQUIRE(k.position.x <= cfg.world_w);
      REQUIRE(k.position.y >= 0.0);
      REQUIRE(k.position.y <= cfg.world_h);
      if (norm(k.velocity) > 0.0 && model == MobilityModel::random_waypoint) {
        REQUIRE(norm(k.velocity) >= cfg.v_min - 1e-9);
        REQUIRE(norm(k.velocity) <= cfg.v_max + 1e-9);
      }
    }
  }
}

TEST_CASE("property: identical seeds give bitwise-identical trajectories") {
  MobilityConfig cfg = rwp_cfg();
  Rng a(123456), b(123456);
  Kinematics ka, kb;
  ka.position = kb.position = {20.0, 30.0};
  double now = 0.0;
  for (int i = 0; i < 5000; ++i) {
    ka = step_kinematics(ka, cfg, now, 0.5, a);
    kb = step_kinematics(kb, cfg, now, 0.5, b);
    now += 0.5;
    REQUIRE(ka.position.x == kb.position.x);
    REQUIRE(ka.position.y == kb.position.y);
    REQUIRE(ka.velocity.x == kb.velocity.x);
    REQUIRE(ka.velocity.y == kb.velocity.y);
    REQUIRE(ka.pause_until == kb.pause_until);
  }
}

TEST_CASE("relative_speed is symmetric and zero for equal velocities") {
  Kinematics a, b;
  a.velocity = {3.0, 4.0};
  b.velocity = {0.0, 0.0};
  CHECK(relative_speed(a, b) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(relative_speed(a, b) == relative_speed(b, a));
  b.velocity = a.velocity;
  CHECK(relative_speed(a, b) == 0.0);

  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    a.velocity = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    b.velocity = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    CHECK(relative_speed(a, b) == relative_speed(b, a));
    CHECK(relative_speed(a, b) >= 0.0);
  }
}

TEST_CASE("sense_velocity: exact passthrough at zero noise, no draws consumed") {
  Kinematics k;
  k.velocity = {1.25, -0.5};
  Rng rng(42);
  const auto before = Rng(42).next();
  Vec2 v = sense_velocity(k, 0.0, rng);
  CHECK(v.x == 1.25);
  CHECK(v.y == -0.5);
  CHECK(rng.next() == before);  // stream untouched
  CHECK_THROWS_AS(sense_velocity(k, -1.0, rng), std::invalid_argument);
}

TEST_CASE("sense_velocity: noise is zero-mean with the requested spread") {
  Kinematics k;
  k.velocity = {2.0, 0.0};
  Rng rng(31337);
  const int n = 10000;
  double sum_x = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec2 v = sense_velocity(k, 0.5, rng);
    sum_x += v.x - 2.0;
    sum_sq += (v.x - 2.0) * (v.x - 2.0);
  }
  const double mean = sum_x / n;
  const double var = sum_sq / n;
  // 3-sigma band for the sample mean of n draws with std 0.5.
  CHECK(std::abs(mean) < 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("step_kinematics rejects non-positive dt") {
  MobilityConfig cfg;
  Rng rng(1);
  Kinematics k;
  CHECK_THROWS_AS(step_kinematics(k, cfg, 0.0, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(step_kinematics(k, cfg, 0.0, -1.0, rng), std::invalid_argument);
}
