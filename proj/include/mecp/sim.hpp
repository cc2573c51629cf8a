// SPDX-License-Identifier: Apache-2.0
//
// Deterministic single-threaded simulation loop: neighbor discovery, lockstep
// clustering epochs, data rounds with ack-timeout failover and ACH promotion,
// failure injection, and the per-event trace stream. All randomness flows
// through named streams derived from the run seed, so identical seeds yield
// identical traces.
#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mecp/metrics.hpp"
#include "mecp/mobility.hpp"
#include "mecp/overlay.hpp"
#include "mecp/protocol.hpp"
#include "mecp/radio.hpp"
#include "mecp/rng.hpp"

namespace mecp {

struct RoundSchedule {
  double t_cluster{1.0};        // clustering epoch length, seconds
  double t_p{10.0};             // data period, seconds
  unsigned frames_per_round{10};
  double ack_timeout{1.0};      // seconds without an ack before failover

  friend bool operator==(const RoundSchedule&, const RoundSchedule&) = default;
};

enum class FailureMode { crash, drain };

struct FailureInjection {
  NodeId node{};
  double time{};
  FailureMode mode{FailureMode::crash};

  friend bool operator==(const FailureInjection&, const FailureInjection&) = default;
};

struct SimParams {
  unsigned node_count{100};
  double world_w{200.0};
  double world_h{200.0};
  Vec2 sink{100.0, 100.0};
  MobilityConfig mobility;
  double sense_noise_std{0.0};
  PowerTable table{default_power_table()};
  RadioEnergyParams energy;
  ProtocolConfig protocol;
  RoundSchedule schedule;
  unsigned rounds{20};
  double p_loss{0.0};
  unsigned data_bits{2000};
  unsigned control_bits{200};
  bool guards_enabled{true};
  std::vector<FailureInjection> injections;
  // When set, one cluster head (largest cluster, ties by smallest id) is
  // crashed at this frame of every round's data period.
  std::optional<unsigned> crash_ch_frame;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct ClusterSnapshot {
  std::vector<NodeId> ch_set;
  std::map<NodeId, NodeId> membership;  // member -> CH
  std::map<NodeId, NodeId> ach_of;      // CH -> its ACH
  unsigned iterations_max{0};
};

// Raised when a run violates one of the protocol's proved properties; this
// is an implementation bug, not a modeled outcome.
struct LemmaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Line-delimited event log: time,seq,kind,src,dst,outcome,energy_delta.
class TraceWriter {
 public:
  void open(const std::string& path);
  void close() { out_.reset(); }  // flushes; further emits are dropped
  bool enabled() const { return static_cast<bool>(out_); }
  void emit(double time, const char* kind, long src, long dst, const char* outcome,
            double energy_delta);

 private:
  std::unique_ptr<std::ofstream> out_;
  std::uint64_t seq_{0};
};

class Simulation {
 public:
  static constexpr long kSink = -2;
  static constexpr long kNone = -1;

  Simulation(const SimParams& params, std::uint64_t seed, TraceWriter* trace = nullptr);

  // Building blocks, also exercised directly by tests.
  void discover_neighbors();
  bool deliver_data(unsigned bits, NodeId from, long to, std::size_t level);
  ClusterSnapshot run_clustering_epoch();
  MetricsRecord run_data_round(unsigned round_index);
  MetricsRecord run_round(unsigned round_index);  // epoch + data period
  std::vector<MetricsRecord> run_all_rounds();

  void inject_failure(NodeId node, double time, FailureMode mode);

  // Introspection.
  const SimParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  double clock() const { return clock_; }
  const NodeState& node(NodeId id) const { return nodes_.at(id); }
  NodeState& node_mut(NodeId id) { return nodes_.at(id); }
  const Kinematics& kinematics(NodeId id) const { return kin_.at(id); }
  void set_kinematics(NodeId id, const Kinematics& k) { kin_.at(id) = k; }
  Vec2 position(NodeId id) const { return kin_.at(id).position; }
  bool alive(NodeId id) const { return ledger_.alive(id); }
  EnergyLedger& ledger() { return ledger_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const ClusterSnapshot& snapshot() const { return snapshot_; }
  OverlayWorld overlay_world() const;
  Overlay build_current_overlay(bool guards_enabled) const;

  // Acting head of the cluster originally led by `ch` (the promoted ACH after
  // a failover), if any alive one exists.
  std::optional<NodeId> acting_ch(NodeId ch) const;

 private:
  void debit(NodeId node, double amount, const char* kind, long src, long dst,
             const char* outcome);
  void trace(const char* kind, long src, long dst, const char* outcome, double delta = 0.0);
  bool channel(unsigned bits, NodeId from, long to, std::size_t level, const char* kind);
  void broadcast_announcement(const Announcement& a, NodeId from, std::size_t level);
  void unicast_announcement(const Announcement& a, NodeId from, NodeId to, std::size_t level);
  void apply_due_injections();
  void promote_achs(unsigned frame);
  void check_lemmas(const ClusterSnapshot& snap) const;
  std::vector<std::pair<NodeId, double>> chs_in_range(NodeId node) const;
  bool forward_aggregate(const Overlay& overlay, NodeId src_ch, unsigned bits);

  SimParams params_;
  std::uint64_t seed_;
  TraceWriter* trace_;
  double clock_{0.0};
  std::vector<Kinematics> kin_;
  std::vector<NodeState> nodes_;
  std::vector<Vec2> sensed_velocity_;
  EnergyLedger ledger_;
  Rng loss_rng_;
  Rng protocol_rng_;
  std::vector<Rng> mobility_rng_;
  std::vector<FailureInjection> pending_;  // sorted by (time, node)
  ClusterSnapshot snapshot_;
  std::map<NodeId, NodeId> promoted_;          // original CH -> promoted ACH
  std::map<NodeId, unsigned> ch_dead_since_;   // acting CH -> frame death observed
};

}  // namespace mecp
