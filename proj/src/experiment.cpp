// SPDX-License-Identifier: Apache-2.0
#include "mecp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace mecp {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::mecp: return "mecp";
    case Mode::heed_mode: return "heed_mode";
    case Mode::mecp_no_ach: return "mecp_no_ach";
  }
  return "mecp";
}

Mode mode_from_string(const std::string& s) {
  if (s == "mecp") return Mode::mecp;
  if (s == "heed_mode") return Mode::heed_mode;
  if (s == "mecp_no_ach") return Mode::mecp_no_ach;
  throw ConfigError("unknown mode '" + s + "' (expected mecp|heed_mode|mecp_no_ach)");
}

SimParams apply_mode(SimParams p, Mode m) {
  switch (m) {
    case Mode::mecp:
      p.protocol.heed_mode = false;
      break;
    case Mode::heed_mode:
      p.protocol.heed_mode = true;
      p.protocol.ach_enabled = false;
      break;
    case Mode::mecp_no_ach:
      p.protocol.heed_mode = false;
      p.protocol.ach_enabled = false;
      break;
  }
  return p;
}

std::vector<MetricsRecord> run_experiment(const ScenarioConfig& cfg, Mode mode,
                                          bool write_outputs) {
  const SimParams params = apply_mode(cfg.params, mode);
  if (write_outputs) std::filesystem::create_directories(cfg.output_dir);

  std::vector<MetricsRecord> rows;
  for (std::uint64_t seed : cfg.seeds) {
    TraceWriter trace;
    if (write_outputs && cfg.trace_enabled) {
      trace.open(cfg.output_dir + "/trace_" + mode_name(mode) + "_seed" +
                 std::to_string(seed) + ".log");
    }
    Simulation sim(params, seed, trace.enabled() ? &trace : nullptr);
    for (unsigned r = 0; r < params.rounds; ++r) rows.push_back(sim.run_round(r));
  }
  if (write_outputs) {
    std::ofstream out(cfg.output_dir + "/metrics_" + mode_name(mode) + ".csv",
                      std::ios::binary);
    write_metrics_csv(out, rows);
  }
  return rows;
}

SeedSummary summarize_seed(std::uint64_t seed, const std::vector<MetricsRecord>& rows) {
  SeedSummary s;
  s.seed = seed;
  unsigned n = 0;
  for (const auto& r : rows) {
    if (r.seed != seed) continue;
    ++n;
    s.delivery_ratio += r.delivery_ratio;
    s.aggregate_delivery_ratio += r.aggregate_delivery_ratio;
    s.recovery_frames_lost += r.recovery_frames_lost;
    s.energy_consumed_j += r.energy_consumed_j;
  }
  if (n > 0) {
    s.delivery_ratio /= n;
    s.aggregate_delivery_ratio /= n;
    s.recovery_frames_lost /= n;
  }
  return s;
}

double Comparison::mean_delivery(std::size_t mode_index) const {
  double sum = 0.0;
  for (const auto& s : per_seed.at(mode_index)) sum += s.delivery_ratio;
  return per_seed.at(mode_index).empty() ? 0.0 : sum / per_seed[mode_index].size();
}

double Comparison::mean_recovery_lost(std::size_t mode_index) const {
  double sum = 0.0;
  for (const auto& s : per_seed.at(mode_index)) sum += s.recovery_frames_lost;
  return per_seed.at(mode_index).empty() ? 0.0 : sum / per_seed[mode_index].size();
}

Comparison compare_modes(const ScenarioConfig& cfg, const std::vector<Mode>& modes,
                         bool write_outputs) {
  if (modes.size() < 2) throw ConfigError("compare needs at least two modes");
  std::set<std::string> names;
  for (Mode m : modes) {
    if (!names.insert(mode_name(m)).second) {
      throw ConfigError("duplicate mode in compare list");
    }
  }

  Comparison c;
  c.modes = modes;
  c.seeds = cfg.seeds;
  for (Mode m : modes) {
    const auto rows = run_experiment(cfg, m, write_outputs);
    std::vector<SeedSummary> per_seed;
    per_seed.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) per_seed.push_back(summarize_seed(seed, rows));
    c.per_seed.push_back(std::move(per_seed));
  }

  if (write_outputs) {
    std::filesystem::create_directories(cfg.output_dir);
    std::ofstream out(cfg.output_dir + "/compare.csv", std::ios::binary);
    write_comparison_csv(out, c);
  }
  return c;
}

void write_comparison_csv(std::ostream& out, const Comparison& c) {
  out << "seed";
  for (Mode m : c.modes) out << ",delivery_ratio_" << mode_name(m);
  for (std::size_t i = 1; i < c.modes.size(); ++i) {
    out << ",diff_" << mode_name(c.modes[i]) << "_minus_" << mode_name(c.modes[0]);
  }
  out << "\n";
  char buf[40];
  const auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  for (std::size_t s = 0; s < c.seeds.size(); ++s) {
    out << c.seeds[s];
    for (std::size_t m = 0; m < c.modes.size(); ++m) {
      out << ',' << fmt(c.per_seed[m][s].delivery_ratio);
    }
    for (std::size_t m = 1; m < c.modes.size(); ++m) {
      out << ','
          << fmt(c.per_seed[m][s].delivery_ratio - c.per_seed[0][s].delivery_ratio);
    }
    out << "\n";
  }
}

double sign_test_p(unsigned wins, unsigned losses) {
  const unsigned n = wins + losses;
  if (n == 0) return 1.0;
  // Exact binomial tail P(X >= wins | n, 1/2).
  double p = 0.0;
  for (unsigned k = wins; k <= n; ++k) {
    const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                         std::lgamma(n - k + 1.0);
    p += std::exp(log_c - n * std::log(2.0));
  }
  return std::min(p, 1.0);
}

}  // namespace mecp
