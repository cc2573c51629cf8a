// SPDX-License-Identifier: Apache-2.0
//
// Discrete transmit-power levels with a low band reserved for intra-cluster
// traffic and a high band for inter-cluster traffic, plus the first-order
// radio energy model and the per-node energy ledger.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mecp/geometry.hpp"
#include "mecp/protocol.hpp"

namespace mecp {

struct PowerLevel {
  double power_mw{};
  double range_m{};

  friend bool operator==(const PowerLevel&, const PowerLevel&) = default;
};

enum class Band { intra, inter };

struct PowerTable {
  std::vector<PowerLevel> levels;  // strictly ascending in power and range
  std::size_t intra_max_level{1};
  std::size_t inter_min_level{2};

  double range_of(std::size_t level) const { return levels.at(level).range_m; }
  double intra_range() const { return levels.at(intra_max_level).range_m; }
  double inter_range() const { return levels.back().range_m; }
  void validate() const;

  friend bool operator==(const PowerTable&, const PowerTable&) = default;
};

// Defaults: 3 levels, ranges {25, 50, 100} m at {1, 4, 16} mW; levels 0-1
// intra, level 2 inter.
PowerTable default_power_table();

// Smallest level in the requested band whose range covers the distance.
// Throws "unreachable" past the band's maximum range; try_min_power_level
// returns nullopt instead.
std::size_t min_power_level(double distance, const PowerTable& table, Band band);
std::optional<std::size_t> try_min_power_level(double distance, const PowerTable& table,
                                               Band band);

// Boundary-inclusive range test at a given level.
bool in_range(Vec2 a, Vec2 b, const PowerTable& table, std::size_t level);

struct RadioEnergyParams {
  double e_max{2.0};            // joules per node
  double e_elec{50e-9};         // joules/bit (electronics, both TX and RX)
  double eps_amp{100e-12};      // joules/bit/m^2 (free-space amplifier)
  double idle_per_round{0.0};   // flat per-round listening cost, joules

  friend bool operator==(const RadioEnergyParams&, const RadioEnergyParams&) = default;
};

double tx_energy(std::uint64_t bits, double dist, const RadioEnergyParams& p);
double rx_energy(std::uint64_t bits, const RadioEnergyParams& p);

// The debit log is the state: the ledger keeps the cumulative amount debited
// per node and derives the residual as e_max - debited, so conservation is
// checkable exactly rather than to a tolerance. A killing debit pins the
// node's cumulative total at exactly e_max.
class EnergyLedger {
 public:
  enum class Outcome { alive, died };

  EnergyLedger(std::size_t node_count, const RadioEnergyParams& params);

  // Debits up to `amount`; returns died when the battery hits zero. The
  // amount actually debited (clamped at the residual) is written to
  // *actual when requested.
  Outcome consume(NodeId node, double amount, double* actual = nullptr);
  void crash(NodeId node);      // alive <- false, residual untouched
  Outcome drain(NodeId node, double* actual = nullptr);  // debit all residual energy

  bool alive(NodeId node) const { return alive_.at(node); }
  double residual(NodeId node) const { return params_.e_max - debited_.at(node); }
  double debited(NodeId node) const { return debited_.at(node); }
  double total_residual() const;
  double total_debited() const { return total_debited_; }
  std::uint64_t debit_count() const { return debit_count_; }
  std::size_t alive_count() const;
  std::size_t size() const { return debited_.size(); }
  const RadioEnergyParams& params() const { return params_; }

 private:
  RadioEnergyParams params_;
  std::vector<double> debited_;
  std::vector<bool> alive_;
  double total_debited_{0.0};
  std::uint64_t debit_count_{0};
};

}  // namespace mecp
