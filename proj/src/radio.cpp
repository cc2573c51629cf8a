// SPDX-License-Identifier: Apache-2.0
#include "mecp/radio.hpp"

namespace mecp {

void PowerTable::validate() const {
  if (levels.empty()) throw std::invalid_argument("power table: no levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i].power_mw <= levels[i - 1].power_mw ||
        levels[i].range_m <= levels[i - 1].range_m) {
      throw std::invalid_argument("power table: levels must be strictly ascending");
    }
  }
  if (intra_max_level >= levels.size() || inter_min_level >= levels.size()) {
    throw std::invalid_argument("power table: band index out of range");
  }
  if (inter_min_level < intra_max_level) {
    throw std::invalid_argument("power table: inter band below intra band");
  }
}

PowerTable default_power_table() {
  PowerTable t;
  t.levels = {{1.0, 25.0}, {4.0, 50.0}, {16.0, 100.0}};
  t.intra_max_level = 1;
  t.inter_min_level = 2;
  return t;
}

std::optional<std::size_t> try_min_power_level(double distance, const PowerTable& table,
                                               Band band) {
  if (distance < 0.0) throw std::invalid_argument("min_power_level: negative distance");
  const std::size_t lo = band == Band::intra ? 0 : table.inter_min_level;
  const std::size_t hi = band == Band::intra ? table.intra_max_level : table.levels.size() - 1;
  for (std::size_t lvl = lo; lvl <= hi; ++lvl) {
    if (table.levels[lvl].range_m >= distance) return lvl;
  }
  return std::nullopt;
}

std::size_t min_power_level(double distance, const PowerTable& table, Band band) {
  if (auto lvl = try_min_power_level(distance, table, band)) return *lvl;
  throw std::out_of_range("min_power_level: unreachable");
}

bool in_range(Vec2 a, Vec2 b, const PowerTable& table, std::size_t level) {
  return distance(a, b) <= table.range_of(level);
}

double tx_energy(std::uint64_t bits, double dist, const RadioEnergyParams& p) {
  if (bits == 0) throw std::invalid_argument("tx_energy: zero bits");
  if (dist < 0.0) throw std::invalid_argument("tx_energy: negative distance");
  const double b = static_cast<double>(bits);
  return p.e_elec * b + p.eps_amp * b * dist * dist;
}

double rx_energy(std::uint64_t bits, const RadioEnergyParams& p) {
  if (bits == 0) throw std::invalid_argument("rx_energy: zero bits");
  return p.e_elec * static_cast<double>(bits);
}

EnergyLedger::EnergyLedger(std::size_t node_count, const RadioEnergyParams& params)
    : params_(params), debited_(node_count, 0.0), alive_(node_count, true) {}

EnergyLedger::Outcome EnergyLedger::consume(NodeId node, double amount, double* actual) {
  if (node >= debited_.size()) throw std::out_of_range("EnergyLedger::consume: unknown node");
  if (amount < 0.0) throw std::invalid_argument("EnergyLedger::consume: negative amount");
  double& d = debited_[node];
  const double remaining = params_.e_max - d;
  double taken;
  Outcome outcome;
  if (params_.e_max - (d + amount) <= 0.0) {
    taken = remaining;
    d = params_.e_max;  // residual exactly zero from here on
    alive_[node] = false;
    outcome = Outcome::died;
  } else {
    taken = amount;
    d += amount;
    outcome = Outcome::alive;
  }
  total_debited_ += taken;
  ++debit_count_;
  if (actual) *actual = taken;
  return outcome;
}

void EnergyLedger::crash(NodeId node) {
  if (node >= debited_.size()) throw std::out_of_range("EnergyLedger::crash: unknown node");
  alive_[node] = false;
}

EnergyLedger::Outcome EnergyLedger::drain(NodeId node, double* actual) {
  if (node >= debited_.size()) throw std::out_of_range("EnergyLedger::drain: unknown node");
  return consume(node, params_.e_max, actual);
}

double EnergyLedger::total_residual() const {
  double sum = 0.0;
  for (double d : debited_) sum += params_.e_max - d;
  return sum;
}

std::size_t EnergyLedger::alive_count() const {
  std::size_t n = 0;
  for (bool a : alive_) n += a ? 1 : 0;
  return n;
}

}  // namespace mecp
