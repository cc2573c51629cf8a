// SPDX-License-Identifier: Apache-2.0
//
// Experiment orchestration: seeded runs per scenario, mode overrides for the
// baseline comparisons, metrics/trace emission and the paired sign test.
#pragma once

#include <string>
#include <vector>

#include "mecp/metrics.hpp"
#include "mecp/scenario.hpp"

namespace mecp {

enum class Mode { mecp, heed_mode, mecp_no_ach };

const char* mode_name(Mode m);
Mode mode_from_string(const std::string& s);

// heed_mode forces VF = 1 and disables the assistant CH; mecp_no_ach only
// disables the assistant.
SimParams apply_mode(SimParams p, Mode m);

// One run per seed; one MetricsRecord per (seed, round), in seed-major order.
// When write_outputs is set, emits <out>/metrics_<mode>.csv and, if tracing is
// enabled, <out>/trace_<mode>_seed<seed>.log.
std::vector<MetricsRecord> run_experiment(const ScenarioConfig& cfg, Mode mode,
                                          bool write_outputs);

struct SeedSummary {
  std::uint64_t seed{};
  double delivery_ratio{};            // mean over rounds
  double aggregate_delivery_ratio{};
  double recovery_frames_lost{};      // mean over rounds
  double energy_consumed_j{};         // total over rounds
};

SeedSummary summarize_seed(std::uint64_t seed, const std::vector<MetricsRecord>& rows);

struct Comparison {
  std::vector<Mode> modes;
  std::vector<std::uint64_t> seeds;
  // per_seed[m][s] is the summary of modes[m] on seeds[s]
  std::vector<std::vector<SeedSummary>> per_seed;

  double mean_delivery(std::size_t mode_index) const;
  double mean_recovery_lost(std::size_t mode_index) const;
};

// Paired runs of every mode over the scenario's seeds. Duplicate modes are an
// error. When write_outputs is set, also emits <out>/compare.csv.
Comparison compare_modes(const ScenarioConfig& cfg, const std::vector<Mode>& modes,
                         bool write_outputs);

void write_comparison_csv(std::ostream& out, const Comparison& c);

// One-sided sign test: probability of >= wins successes in wins+losses fair
// coin flips. Ties are dropped by the caller.
double sign_test_p(unsigned wins, unsigned losses);

}  // namespace mecp
