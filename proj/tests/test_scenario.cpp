// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mecp/experiment.hpp"
#include "mecp/scenario.hpp"

using namespace mecp;

TEST_CASE("empty scenario document yields the documented defaults") {
  auto cfg = parse_scenario("{}");
  const SimParams& p = cfg.params;
  CHECK(p.node_count == 100);
  CHECK(p.world_w == 200.0);
  CHECK(p.world_h == 200.0);
  CHECK(p.sink.x == 100.0);  // world center
  CHECK(p.sink.y == 100.0);
  CHECK(p.mobility.model == MobilityModel::random_waypoint);
  CHECK(p.mobility.v_max == 5.0);
  CHECK(p.table == default_power_table());
  CHECK(p.energy.e_max == 2.0);
  CHECK(p.protocol.k_fraction == 0.1);
  CHECK(p.protocol.p_min == 1.0 / 1024.0);
  CHECK(p.protocol.e_max == p.energy.e_max);
  CHECK_FALSE(p.protocol.heed_mode);
  CHECK(p.protocol.ach_enabled);
  CHECK(p.schedule.frames_per_round == 10);
  CHECK(p.rounds == 20);
  CHECK(p.p_loss == 0.0);
  CHECK(p.guards_enabled);
  CHECK_FALSE(p.crash_ch_frame.has_value());
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
  CHECK(cfg.output_dir == "out");
  CHECK(cfg.trace_enabled);
}

TEST_CASE("explicit keys override the defaults") {
  auto cfg = parse_scenario(R"({
    "node_count": 50,
    "world": {"width": 600, "height": 50},
    "sink": {"x": 10, "y": 25},
    "mobility": {"model": "static", "sense_noise_std": 0.25},
    "protocol": {"heed_mode": true, "ach_enabled": false, "p_min": 0.0625},
    "rounds": 3,
    "p_loss": 0.1,
    "crash_ch_frame": 4,
    "seeds": [7, 8, 9],
    "trace": false
  })");
  const SimParams& p = cfg.params;
  CHECK(p.node_count == 50);
  CHECK(p.world_w == 600.0);
  CHECK(p.mobility.world_w == 600.0);  // mobility bounds follow the world
  CHECK(p.mobility.world_h == 50.0);
  CHECK(p.sink.x == 10.0);
  CHECK(p.mobility.model == MobilityModel::static_model);
  CHECK(p.sense_noise_std == 0.25);
  CHECK(p.protocol.heed_mode);
  CHECK_FALSE(p.protocol.ach_enabled);
  CHECK(p.protocol.p_min == 0.0625);
  CHECK(p.rounds == 3);
  CHECK(p.p_loss == 0.1);
  CHECK(p.crash_ch_frame == 4u);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{7, 8, 9});
  CHECK_FALSE(cfg.trace_enabled);
}

TEST_CASE("unknown keys are rejected with their full path") {
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"node_cuont": 10})"),
                       doctest::Contains("node_cuont"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"mobility": {"vmax": 3}})"),
                       doctest::Contains("mobility.vmax"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_scenario(R"({"schedule": {"frames": 5}})"),
                       doctest::Contains("schedule.frames"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("not json"), ConfigError);
  CHECK_THROWS_AS(parse_scenario("[1,2]"), ConfigError);
}

TEST_CASE("parse(emit(cfg)) round-trips exactly") {
  ScenarioConfig cfg;
  cfg.params.node_count = 42;
  cfg.params.world_w = 300.0;
  cfg.params.world_h = 120.0;
  cfg.params.mobility.world_w = 300.0;
  cfg.params.mobility.world_h = 120.0;
  cfg.params.sink = {12.5, 60.0};
  cfg.params.mobility.model = MobilityModel::constant_velocity;
  cfg.params.mobility.v_min = 0.5;
  cfg.params.mobility.v_max = 3.5;
  cfg.params.mobility.pause_time = 1.5;
  cfg.params.sense_noise_std = 0.1;
  cfg.params.energy.e_max = 1.25;
  cfg.params.protocol.e_max = 1.25;
  cfg.params.protocol.k_fraction = 0.15;
  cfg.params.protocol.p_min = 0.001953125;
  cfg.params.protocol.cost_mode = CostMode::ccf;
  cfg.params.protocol.va_threshold = 2.0;
  cfg.params.rounds = 7;
  cfg.params.p_loss = 0.05;
  cfg.params.guards_enabled = false;
  cfg.params.injections.push_back({3, 12.5, FailureMode::drain});
  cfg.params.crash_ch_frame = 2;
  cfg.seeds = {11, 22};
  cfg.output_dir = "results";
  cfg.trace_enabled = false;

  const std::string text = emit_scenario(cfg);
  auto back = parse_scenario(text);
  CHECK(back == cfg);
  // Emission is itself stable.
  CHECK(emit_scenario(back) == text);

  // And the default config round-trips too.
  ScenarioConfig dflt;
  CHECK(parse_scenario(emit_scenario(dflt)) == dflt);
}

TEST_CASE("validation rejects out-of-range parameters") {
  const auto reject = [](const char* text) {
    CHECK_THROWS_AS(parse_scenario(text), ConfigError);
  };
  reject(R"({"node_count": 0})");
  reject(R"({"world": {"width": -5}})");
  reject(R"({"protocol": {"k_fraction": 0}})");
  reject(R"({"protocol": {"k_fraction": 1.5}})");
  reject(R"({"protocol": {"p_min": 0}})");
  reject(R"({"protocol": {"p_min": 0.5}})");  // exceeds default K
  reject(R"({"protocol": {"va_threshold": 0}})");
  reject(R"({"mobility": {"v_min": 4, "v_max": 2}})");
  reject(R"({"mobility": {"sense_noise_std": -1}})");
  reject(R"({"power_table": {"levels": [{"power_mw": 1, "range_m": 10},
                                        {"power_mw": 1, "range_m": 20}]}})");
  reject(R"({"schedule": {"t_p_s": 0}})");
  reject(R"({"schedule": {"frames_per_round": 0}})");
  reject(R"({"p_loss": 1.5})");
  reject(R"({"data_bits": 0})");
  reject(R"({"crash_ch_frame": 10})");  // frames_per_round defaults to 10
  reject(R"({"failures": [{"node": 500, "time_s": 1}]})");
  reject(R"({"failures": [{"node": 1, "time_s": -1}]})");
  reject(R"({"failures": [{"node": 1, "time_s": 1, "mode": "explode"}]})");
  reject(R"({"seeds": []})");
}

TEST_CASE("metrics CSV: version line, fixed header, one row per record") {
  MetricsRecord r;
  r.seed = 5;
  r.round = 2;
  r.delivery_ratio = 0.875;
  r.aggregate_delivery_ratio = 1.0;
  r.ch_count = 4;
  r.mean_cluster_size = 7.5;
  r.max_cluster_size = 12;
  r.clustering_iterations_max = 6;
  r.energy_consumed_j = 0.125;
  r.alive_count = 30;
  r.orphan_count = 1;
  r.recovery_frames_lost = 3;
  std::ostringstream out;
  write_metrics_csv(out, {r});
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == std::string("# ") + kMetricsCsvVersion);
  REQUIRE(std::getline(in, line));
  CHECK(line ==
        "seed,round,delivery_ratio,aggregate_delivery_ratio,ch_count,"
        "mean_cluster_size,max_cluster_size,clustering_iterations_max,"
        "energy_consumed_j,alive_count,orphan_count,recovery_frames_lost");
  REQUIRE(std::getline(in, line));
  CHECK(line == "5,2,0.875,1,4,7.5,12,6,0.125,30,1,3");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("mode names and overrides") {
  CHECK(mode_from_string("mecp") == Mode::mecp);
  CHECK(mode_from_string("heed_mode") == Mode::heed_mode);
  CHECK(mode_from_string("mecp_no_ach") == Mode::mecp_no_ach);
  CHECK_THROWS_AS(mode_from_string("leach"), ConfigError);
  for (Mode m : {Mode::mecp, Mode::heed_mode, Mode::mecp_no_ach}) {
    CHECK(mode_from_string(mode_name(m)) == m);
  }

  SimParams p;
  auto h = apply_mode(p, Mode::heed_mode);
  CHECK(h.protocol.heed_mode);
  CHECK_FALSE(h.protocol.ach_enabled);
  auto n = apply_mode(p, Mode::mecp_no_ach);
  CHECK_FALSE(n.protocol.heed_mode);
  CHECK_FALSE(n.protocol.ach_enabled);
  auto m = apply_mode(h, Mode::mecp);
  CHECK_FALSE(m.protocol.heed_mode);
}

TEST_CASE("summarize_seed averages per-round rows of one seed") {
  std::vector<MetricsRecord> rows(3);
  rows[0].seed = 1;
  rows[0].delivery_ratio = 0.5;
  rows[0].recovery_frames_lost = 2;
  rows[0].energy_consumed_j = 0.25;
  rows[1].seed = 1;
  rows[1].delivery_ratio = 1.0;
  rows[1].recovery_frames_lost = 0;
  rows[1].energy_consumed_j = 0.25;
  rows[2].seed = 2;  // different seed, ignored
  rows[2].delivery_ratio = 0.0;
  auto s = summarize_seed(1, rows);
  CHECK(s.delivery_ratio == 0.75);
  CHECK(s.recovery_frames_lost == 1.0);
  CHECK(s.energy_consumed_j == 0.5);
}

TEST_CASE("compare_modes rejects bad mode lists and pairs runs by seed") {
  auto cfg = parse_scenario(R"({
    "node_count": 15, "rounds": 1, "seeds": [3, 4],
    "mobility": {"model": "static"}, "trace": false
  })");
  CHECK_THROWS_AS(compare_modes(cfg, {Mode::mecp}, false), ConfigError);
  CHECK_THROWS_AS(compare_modes(cfg, {Mode::mecp, Mode::mecp}, false), ConfigError);

  auto c = compare_modes(cfg, {Mode::heed_mode, Mode::mecp}, false);
  REQUIRE(c.per_seed.size() == 2);
  REQUIRE(c.per_seed[0].size() == 2);
  CHECK(c.per_seed[0][0].seed == 3);
  CHECK(c.per_seed[0][1].seed == 4);
  CHECK(c.mean_delivery(0) >= 0.0);
  CHECK(c.mean_delivery(0) <= 1.0);

  std::ostringstream out;
  write_comparison_csv(out, c);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "seed,delivery_ratio_heed_mode,delivery_ratio_mecp,"
                "diff_mecp_minus_heed_mode");
  unsigned data_lines = 0;
  while (std::getline(in, line)) ++data_lines;
  CHECK(data_lines == 2);
}

TEST_CASE("sign test: exact binomial tail") {
  CHECK(sign_test_p(0, 0) == 1.0);
  CHECK(sign_test_p(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sign_test_p(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sign_test_p(2, 0) == doctest::Approx(0.25).epsilon(1e-12));
  // P(X >= 8 | n=10) = (45 + 10 + 1) / 1024
  CHECK(sign_test_p(8, 2) == doctest::Approx(56.0 / 1024.0).epsilon(1e-9));
  // Tail probabilities are monotone in the number of wins.
  for (unsigned w = 1; w <= 10; ++w) {
    CHECK(sign_test_p(w, 10 - w) <= sign_test_p(w - 1, 11 - w));
  }
}

TEST_CASE("run_experiment returns seed-major rows without touching disk") {
  auto cfg = parse_scenario(R"({
    "node_count": 12, "rounds": 2, "seeds": [5, 6],
    "mobility": {"model": "static"}, "trace": false
  })");
  auto rows = run_experiment(cfg, Mode::mecp, false);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].seed == 5);
  CHECK(rows[1].seed == 5);
  CHECK(rows[2].seed == 6);
  CHECK(rows[3].seed == 6);
  CHECK(rows[0].round == 0);
  CHECK(rows[1].round == 1);
}
