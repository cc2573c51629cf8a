// SPDX-License-Identifier: Apache-2.0
#include "mecp/sim.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <limits>
#include <set>

namespace mecp {

namespace {

constexpr std::uint64_t kTopologyTag = 0x746f706fULL;  // "topo"
constexpr std::uint64_t kLossTag = 0x6c6f7373ULL;      // "loss"
constexpr std::uint64_t kProtocolTag = 0x70726f74ULL;  // "prot"
constexpr std::uint64_t kMobilityTag = 0x6d6f6269ULL;  // "mobi"

}  // namespace

void TraceWriter::open(const std::string& path) {
  out_ = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*out_) throw std::runtime_error("trace: cannot open " + path);
  seq_ = 0;
}

void TraceWriter::emit(double time, const char* kind, long src, long dst,
                       const char* outcome, double energy_delta) {
  if (!out_) return;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.6f,%" PRIu64 ",%s,%ld,%ld,%s,%.17g\n", time, seq_++,
                kind, src, dst, outcome, energy_delta);
  *out_ << buf;
}

Simulation::Simulation(const SimParams& params, std::uint64_t seed, TraceWriter* trace)
    : params_(params),
      seed_(seed),
      trace_(trace),
      kin_(params.node_count),
      nodes_(params.node_count),
      sensed_velocity_(params.node_count),
      ledger_(params.node_count, params.energy),
      loss_rng_(derive_seed(seed, kLossTag)),
      protocol_rng_(derive_seed(seed, kProtocolTag)) {
  params_.table.validate();
  Rng topo(derive_seed(seed, kTopologyTag));
  mobility_rng_.reserve(params.node_count);
  for (unsigned i = 0; i < params.node_count; ++i) {
    mobility_rng_.emplace_back(derive_seed(seed, splitmix64(kMobilityTag + i)));
    kin_[i].position = {topo.uniform01() * params_.world_w,
                        topo.uniform01() * params_.world_h};
    if (params_.mobility.model == MobilityModel::constant_velocity) {
      const double angle = topo.uniform01() * 2.0 * M_PI;
      const double speed =
          params_.mobility.v_min +
          topo.uniform01() * (params_.mobility.v_max - params_.mobility.v_min);
      kin_[i].velocity = {speed * std::cos(angle), speed * std::sin(angle)};
    }
    nodes_[i].me = i;
  }
}

void Simulation::trace(const char* kind, long src, long dst, const char* outcome,
                       double delta) {
  if (trace_) trace_->emit(clock_, kind, src, dst, outcome, delta);
}

void Simulation::debit(NodeId node, double amount, const char* kind, long src, long dst,
                       const char* outcome) {
  double actual = 0.0;
  const auto outcome_before = ledger_.consume(node, amount, &actual);
  trace(kind, src, dst, outcome, actual);
  if (outcome_before == EnergyLedger::Outcome::died) {
    trace("node_died", static_cast<long>(node), kNone, "energy", 0.0);
  }
}

bool Simulation::deliver_data(unsigned bits, NodeId from, long to, std::size_t level) {
  return channel(bits, from, to, level, "data");
}

bool Simulation::channel(unsigned bits, NodeId from, long to, std::size_t level,
                         const char* kind) {
  if (!ledger_.alive(from)) return false;
  const Vec2 from_pos = kin_[from].position;
  const Vec2 to_pos = to == kSink ? params_.sink : kin_[static_cast<NodeId>(to)].position;
  const double dist = distance(from_pos, to_pos);
  const double range = params_.table.range_of(level);

  const bool to_alive = to == kSink || ledger_.alive(static_cast<NodeId>(to));
  const bool reachable = dist <= range;
  const char* outcome;
  if (!to_alive) {
    outcome = "dead";
  } else if (!reachable) {
    outcome = "out_of_range";
  } else if (params_.p_loss > 0.0 && loss_rng_.uniform01() < params_.p_loss) {
    outcome = "lost";
  } else {
    outcome = "delivered";
  }

  debit(from, tx_energy(bits, std::min(dist, range), params_.energy), kind,
        static_cast<long>(from), to, outcome);
  const bool delivered = std::strcmp(outcome, "delivered") == 0;
  if (delivered && to != kSink) {
    debit(static_cast<NodeId>(to), rx_energy(bits, params_.energy), "rx",
          static_cast<long>(from), to, "delivered");
  }
  return delivered;
}

namespace {

// Receivers of a broadcast at `level` from `from`, in id order, before loss.
std::vector<NodeId> in_range_receivers(const std::vector<Kinematics>& kin,
                                       const EnergyLedger& ledger, NodeId from,
                                       double range) {
  std::vector<NodeId> out;
  for (NodeId j = 0; j < kin.size(); ++j) {
    if (j == from || !ledger.alive(j)) continue;
    if (distance(kin[from].position, kin[j].position) <= range) out.push_back(j);
  }
  return out;
}

}  // namespace

void Simulation::broadcast_announcement(const Announcement& a, NodeId from,
                                        std::size_t level) {
  if (!ledger_.alive(from)) return;
  const double range = params_.table.range_of(level);
  debit(from, tx_energy(params_.control_bits, range, params_.energy), "tx",
        static_cast<long>(from), kNone, "broadcast");
  for (NodeId j : in_range_receivers(kin_, ledger_, from, range)) {
    if (params_.p_loss > 0.0 && loss_rng_.uniform01() < params_.p_loss) {
      trace("rx", static_cast<long>(from), static_cast<long>(j), "lost", 0.0);
      continue;
    }
    debit(j, rx_energy(params_.control_bits, params_.energy), "rx",
          static_cast<long>(from), static_cast<long>(j), "delivered");
    absorb_announcements(nodes_[j], std::span<const Announcement>(&a, 1));
  }
}

void Simulation::unicast_announcement(const Announcement& a, NodeId from, NodeId to,
                                      std::size_t level) {
  if (channel(params_.control_bits, from, static_cast<long>(to), level, "ctrl")) {
    absorb_announcements(nodes_[to], std::span<const Announcement>(&a, 1));
  }
}

void Simulation::discover_neighbors() {
  for (NodeId i = 0; i < params_.node_count; ++i) {
    sensed_velocity_[i] = sense_velocity(kin_[i], params_.sense_noise_std, mobility_rng_[i]);
    nodes_[i].l_adj.clear();
  }
  const double range = params_.table.intra_range();
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (!ledger_.alive(i)) continue;
    debit(i, tx_energy(params_.control_bits, range, params_.energy), "tx",
          static_cast<long>(i), kNone, "hello");
    for (NodeId j : in_range_receivers(kin_, ledger_, i, range)) {
      debit(j, rx_energy(params_.control_bits, params_.energy), "rx",
            static_cast<long>(i), static_cast<long>(j), "delivered");
      const double dist = distance(kin_[i].position, kin_[j].position);
      NeighborEntry e;
      e.id = i;
      e.min_power = min_power_level(dist, params_.table, Band::intra);
      e.min_power_mw = params_.table.levels[e.min_power].power_mw;
      e.relative_speed = norm(sensed_velocity_[j] - sensed_velocity_[i]);
      nodes_[j].l_adj.push_back(e);
    }
  }
}

void Simulation::apply_due_injections() {
  while (!pending_.empty() && pending_.front().time <= clock_) {
    const FailureInjection inj = pending_.front();
    pending_.erase(pending_.begin());
    if (inj.mode == FailureMode::crash) {
      ledger_.crash(inj.node);
      trace("inject_failure", static_cast<long>(inj.node), kNone, "crash", 0.0);
    } else {
      double actual = 0.0;
      ledger_.drain(inj.node, &actual);
      trace("inject_failure", static_cast<long>(inj.node), kNone, "drain", actual);
    }
  }
}

void Simulation::inject_failure(NodeId node, double time, FailureMode mode) {
  if (node >= params_.node_count) throw std::invalid_argument("inject_failure: unknown node");
  for (const auto& p : pending_) {
    if (p.node == node && p.time == time) {
      throw std::invalid_argument("inject_failure: duplicate injection for node/time");
    }
  }
  pending_.push_back({node, time, mode});
  std::stable_sort(pending_.begin(), pending_.end(),
                   [](const FailureInjection& a, const FailureInjection& b) {
                     return a.time < b.time || (a.time == b.time && a.node < b.node);
                   });
}

ClusterSnapshot Simulation::run_clustering_epoch() {
  apply_due_injections();
  for (NodeId i = 0; i < params_.node_count; ++i) {
    nodes_[i] = NodeState{};
    nodes_[i].me = i;
  }
  promoted_.clear();
  ch_dead_since_.clear();
  trace("cluster_epoch", kNone, kNone, "begin", 0.0);

  discover_neighbors();
  const std::size_t intra_level = params_.table.intra_max_level;

  // Phase I: costs and CH probabilities, then the cost/velocity broadcast.
  std::vector<std::pair<NodeId, Announcement>> phase1_out;
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (!ledger_.alive(i)) continue;
    auto r = init_phase1(i, std::move(nodes_[i].l_adj), params_.protocol,
                         ledger_.residual(i), sensed_velocity_[i]);
    nodes_[i] = std::move(r.state);
    phase1_out.emplace_back(i, r.broadcast);
  }
  for (const auto& [from, a] : phase1_out) broadcast_announcement(a, from, intra_level);

  // Phase II: lockstep iterations; declarations emitted in iteration k are
  // absorbed at k+1, so no node sees intra-iteration output.
  const unsigned bound = max_iterations(params_.protocol.p_min);
  std::vector<std::vector<Announcement>> next_inbox(params_.node_count);
  for (unsigned iter = 0; iter <= bound + 1; ++iter) {
    bool any_active = false;
    for (NodeId i = 0; i < params_.node_count; ++i) {
      if (ledger_.alive(i) && !nodes_[i].phase2_done) any_active = true;
    }
    if (!any_active) break;
    if (iter > bound) {
      throw LemmaViolation("termination: a node exceeded the iteration bound");
    }
    std::vector<std::vector<Announcement>> inbox = std::move(next_inbox);
    next_inbox.assign(params_.node_count, {});
    std::vector<std::pair<NodeId, Announcement>> outgoing;
    for (NodeId i = 0; i < params_.node_count; ++i) {
      if (!ledger_.alive(i)) continue;
      if (nodes_[i].phase2_done) {
        absorb_announcements(nodes_[i], inbox[i]);
        continue;
      }
      const double draw = protocol_rng_.uniform01();
      auto r = step_phase2(std::move(nodes_[i]), inbox[i], draw);
      nodes_[i] = std::move(r.state);
      for (const auto& a : r.out) outgoing.emplace_back(i, a);
    }
    for (const auto& [from, a] : outgoing) {
      if (!ledger_.alive(from)) continue;
      const double range = params_.table.range_of(intra_level);
      debit(from, tx_energy(params_.control_bits, range, params_.energy), "tx",
            static_cast<long>(from), kNone, "broadcast");
      for (NodeId j : in_range_receivers(kin_, ledger_, from, range)) {
        if (params_.p_loss > 0.0 && loss_rng_.uniform01() < params_.p_loss) {
          trace("rx", static_cast<long>(from), static_cast<long>(j), "lost", 0.0);
          continue;
        }
        debit(j, rx_energy(params_.control_bits, params_.energy), "rx",
              static_cast<long>(from), static_cast<long>(j), "delivered");
        next_inbox[j].push_back(a);
      }
    }
  }
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (ledger_.alive(i)) absorb_announcements(nodes_[i], next_inbox[i]);
  }

  // Phase III: pick a final CH or become one; joins and declarations land
  // immediately (within the epoch's synchronization slot).
  std::vector<std::pair<NodeId, std::vector<Announcement>>> phase3_out;
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (!ledger_.alive(i)) continue;
    auto r = finalize_phase3(std::move(nodes_[i]));
    nodes_[i] = std::move(r.state);
    phase3_out.emplace_back(i, std::move(r.out));
  }
  for (const auto& [from, anns] : phase3_out) {
    for (const auto& a : anns) {
      if (a.kind == AnnouncementKind::join) {
        const double d = distance(kin_[from].position, kin_[*a.payload].position);
        const auto lvl = try_min_power_level(d, params_.table, Band::intra);
        unicast_announcement(a, from, *a.payload, lvl.value_or(intra_level));
      } else {
        broadcast_announcement(a, from, intra_level);
      }
    }
  }

  // ACH selection by each CH.
  if (params_.protocol.ach_enabled) {
    for (NodeId i = 0; i < params_.node_count; ++i) {
      if (!ledger_.alive(i) || nodes_[i].role != Role::final_ch) continue;
      auto r = select_ach(std::move(nodes_[i]));
      nodes_[i] = std::move(r.state);
      if (r.out) broadcast_announcement(*r.out, i, intra_level);
    }
  }

  ClusterSnapshot snap;
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (!ledger_.alive(i)) continue;
    const NodeState& st = nodes_[i];
    snap.iterations_max = std::max(snap.iterations_max, st.iteration);
    if (st.role == Role::final_ch) {
      snap.ch_set.push_back(i);
      if (st.my_ach) snap.ach_of.emplace(i, *st.my_ach);
    } else if (st.role == Role::member && st.my_ch) {
      snap.membership.emplace(i, *st.my_ch);
    }
  }
  check_lemmas(snap);
  snapshot_ = snap;
  clock_ += params_.schedule.t_cluster;
  trace("cluster_epoch", kNone, kNone, "end", 0.0);
  return snap;
}

void Simulation::check_lemmas(const ClusterSnapshot& snap) const {
  const unsigned bound = max_iterations(params_.protocol.p_min);
  if (snap.iterations_max > bound) {
    throw LemmaViolation("termination: observed iterations exceed the bound");
  }
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (!ledger_.alive(i)) continue;
    const NodeState& st = nodes_[i];
    const bool is_ch = st.role == Role::final_ch;
    const bool is_member = st.role == Role::member && st.my_ch.has_value();
    if (!is_ch && !is_member) {
      throw LemmaViolation("coverage: node " + std::to_string(i) +
                           " ended neither CH nor member");
    }
  }
  // Each node may appear in at most one CH's member list.
  std::set<NodeId> seen;
  for (NodeId ch : snap.ch_set) {
    for (const auto& m : nodes_[ch].l_members) {
      if (!seen.insert(m.id).second) {
        throw LemmaViolation("uniqueness: node " + std::to_string(m.id) +
                             " is in more than one cluster");
      }
    }
  }
  for (const auto& [ch, ach] : snap.ach_of) {
    const auto& members = nodes_[ch].l_members;
    const bool found = std::any_of(members.begin(), members.end(),
                                   [&](const MemberEntry& m) { return m.id == ach; });
    if (!found) {
      throw LemmaViolation("ach: assistant of CH " + std::to_string(ch) +
                           " is not one of its members");
    }
  }
}

std::vector<std::pair<NodeId, double>> Simulation::chs_in_range(NodeId node) const {
  std::vector<std::pair<NodeId, double>> out;
  const double range = params_.table.intra_range();
  for (NodeId j = 0; j < params_.node_count; ++j) {
    if (j == node || !ledger_.alive(j) || nodes_[j].role != Role::final_ch) continue;
    if (distance(kin_[node].position, kin_[j].position) <= range) {
      out.emplace_back(j, nodes_[j].cost);
    }
  }
  return out;
}

std::optional<NodeId> Simulation::acting_ch(NodeId ch) const {
  const auto it = promoted_.find(ch);
  const NodeId act = it == promoted_.end() ? ch : it->second;
  if (!ledger_.alive(act)) return std::nullopt;
  return act;
}

void Simulation::promote_achs(unsigned frame) {
  for (NodeId orig : snapshot_.ch_set) {
    const auto it = promoted_.find(orig);
    const NodeId act = it == promoted_.end() ? orig : it->second;
    if (ledger_.alive(act)) continue;
    const auto seen = ch_dead_since_.find(act);
    if (seen == ch_dead_since_.end()) {
      ch_dead_since_.emplace(act, frame);
      continue;
    }
    if (frame <= seen->second) continue;
    if (!params_.protocol.ach_enabled) continue;
    const auto& dead = nodes_[act];
    if (!dead.my_ach || *dead.my_ach == act || !ledger_.alive(*dead.my_ach)) continue;
    const NodeId heir = *dead.my_ach;
    if (nodes_[heir].role == Role::final_ch) continue;  // already leads elsewhere

    // The assistant holds the CH's member list by construction; it assumes
    // the CH role and the members treat it as their new head.
    NodeState& h = nodes_[heir];
    h.role = Role::final_ch;
    h.my_ch = heir;
    h.is_ach = false;
    h.sending_to_ach = false;
    h.orphaned = false;
    h.l_members.clear();
    for (const auto& m : dead.l_members) {
      if (m.id != heir && ledger_.alive(m.id)) h.l_members.push_back(m);
    }
    for (const auto& m : h.l_members) {
      NodeState& ms = nodes_[m.id];
      if (ms.role == Role::member && ms.my_ch && *ms.my_ch == act) {
        ms.my_ch = heir;
        ms.sending_to_ach = false;
        ms.my_ach.reset();
        ms.orphaned = false;
      }
    }
    promoted_[orig] = heir;
    trace("ach_promote", static_cast<long>(act), static_cast<long>(heir), "promoted", 0.0);

    Announcement decl{AnnouncementKind::final_ch, heir, h.cost, std::nullopt, std::nullopt};
    broadcast_announcement(decl, heir, params_.table.intra_max_level);
    auto r = select_ach(std::move(nodes_[heir]));
    nodes_[heir] = std::move(r.state);
    if (r.out) broadcast_announcement(*r.out, heir, params_.table.intra_max_level);
  }
}

OverlayWorld Simulation::overlay_world() const {
  OverlayWorld w;
  w.position = [this](NodeId id) { return kin_[id].position; };
  w.alive = [this](NodeId id) { return ledger_.alive(id); };
  for (NodeId i = 0; i < params_.node_count; ++i) w.all_nodes.push_back(i);
  w.sink = params_.sink;
  return w;
}

Overlay Simulation::build_current_overlay(bool guards_enabled) const {
  std::vector<NodeId> chs;
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (ledger_.alive(i) && nodes_[i].role == Role::final_ch) chs.push_back(i);
  }
  return build_overlay(chs, overlay_world(), params_.table, guards_enabled);
}

bool Simulation::forward_aggregate(const Overlay& overlay, NodeId src_ch, unsigned bits) {
  const auto send_hop = [&](NodeId from, long to, std::optional<NodeId> guard) {
    const auto level_for = [&](Vec2 a, Vec2 b) {
      const double d = distance(a, b);
      const auto lvl = try_min_power_level(d, params_.table, Band::inter);
      return lvl.value_or(params_.table.levels.size() - 1);
    };
    const Vec2 to_pos = to == kSink ? params_.sink : kin_[static_cast<NodeId>(to)].position;
    if (guard) {
      const Vec2 gpos = kin_[*guard].position;
      if (!channel(bits, from, static_cast<long>(*guard),
                   level_for(kin_[from].position, gpos), "aggregate")) {
        return false;
      }
      return channel(bits, *guard, to, level_for(gpos, to_pos), "aggregate");
    }
    return channel(bits, from, to, level_for(kin_[from].position, to_pos), "aggregate");
  };

  Route route = route_to_sink(overlay, src_ch);
  bool repaired = false;
  const Overlay* ov = &overlay;
  Overlay rebuilt;
  while (true) {
    if (route.partitioned) {
      trace("aggregate", static_cast<long>(src_ch), kSink, "partitioned", 0.0);
      return false;
    }
    bool failed = false;
    NodeId cur = route.hops.front().ch;
    for (std::size_t i = 1; i < route.hops.size() && !failed; ++i) {
      const RouteHop& hop = route.hops[i];
      if (!send_hop(cur, static_cast<long>(hop.ch), hop.guard_to_here)) {
        failed = true;
        break;
      }
      cur = hop.ch;
    }
    if (!failed) {
      if (send_hop(cur, kSink, route.sink_guard)) return true;
      failed = true;
    }
    if (repaired) {
      trace("aggregate", static_cast<long>(src_ch), kSink, "lost", 0.0);
      return false;
    }
    // One repair attempt: recompute against the current world from the
    // stranded hop.
    repaired = true;
    rebuilt = build_current_overlay(params_.guards_enabled);
    ov = &rebuilt;
    if (std::find(ov->ch_set.begin(), ov->ch_set.end(), cur) == ov->ch_set.end()) {
      trace("aggregate", static_cast<long>(src_ch), kSink, "lost", 0.0);
      return false;
    }
    route = route_to_sink(*ov, cur);
  }
}

MetricsRecord Simulation::run_data_round(unsigned round_index) {
  const RoundSchedule& sched = params_.schedule;
  const double frame_dt = sched.t_p / sched.frames_per_round;
  const double data_start = clock_;
  const double baseline_debit = ledger_.total_debited();

  MetricsRecord row;
  row.seed = seed_;
  row.round = round_index;
  row.clustering_iterations_max = snapshot_.iterations_max;

  unsigned frames_generated = 0;
  unsigned frames_delivered = 0;
  struct AffectedStats {
    unsigned lost = 0;
    unsigned delivered = 0;
  };
  std::map<NodeId, AffectedStats> affected;

  // Deterministic per-round CH crash: the largest cluster, ties by id.
  std::optional<NodeId> crash_target;
  if (params_.crash_ch_frame) {
    std::size_t best_size = 0;
    for (NodeId ch : snapshot_.ch_set) {
      if (!ledger_.alive(ch)) continue;
      const std::size_t size = nodes_[ch].l_members.size();
      if (size > best_size && size > 0) {
        best_size = size;
        crash_target = ch;
      }
    }
  }

  for (unsigned f = 0; f < sched.frames_per_round; ++f) {
    clock_ = data_start + f * frame_dt;
    trace("move_step", kNone, kNone, "frame", 0.0);
    apply_due_injections();
    if (crash_target && *params_.crash_ch_frame == f && ledger_.alive(*crash_target)) {
      ledger_.crash(*crash_target);
      trace("inject_failure", static_cast<long>(*crash_target), kNone, "crash_ch", 0.0);
    }

    // Detect dead acting CHs, register their members for loss accounting.
    for (NodeId orig : snapshot_.ch_set) {
      const auto it = promoted_.find(orig);
      const NodeId act = it == promoted_.end() ? orig : it->second;
      if (ledger_.alive(act) || ch_dead_since_.count(act)) continue;
      ++row.ch_failures;
      const auto& ach = nodes_[act].my_ach;
      if (ach && *ach != act && ledger_.alive(*ach) &&
          distance(kin_[act].position, kin_[*ach].position) <=
              2.0 * params_.table.intra_range()) {
        row.ach_recovery_applicable = true;
      }
      for (const auto& [member, ch] : snapshot_.membership) {
        if (ch != orig || !ledger_.alive(member)) continue;
        if (ach && *ach == member) continue;  // the heir stops being a member
        affected.emplace(member, AffectedStats{});
      }
    }
    promote_achs(f);

    for (NodeId i = 0; i < params_.node_count; ++i) {
      if (!ledger_.alive(i)) continue;
      kin_[i] = step_kinematics(kin_[i], params_.mobility, clock_, frame_dt,
                                mobility_rng_[i]);
    }

    for (NodeId i = 0; i < params_.node_count; ++i) {
      if (!ledger_.alive(i) || nodes_[i].role != Role::member) continue;
      ++frames_generated;
      const auto target = nodes_[i].data_target();
      bool ok = false;
      if (target) {
        const double d = distance(kin_[i].position, kin_[*target].position);
        const auto lvl = try_min_power_level(d, params_.table, Band::intra);
        ok = deliver_data(params_.data_bits, i, static_cast<long>(*target),
                          lvl.value_or(params_.table.intra_max_level));
      }
      const auto diag = affected.find(i);
      if (ok) {
        ++frames_delivered;
        if (diag != affected.end()) ++diag->second.delivered;
      } else {
        if (diag != affected.end()) {
          ++diag->second.lost;
          ++row.recovery_frames_lost;
        }
        if (target && ledger_.alive(i)) {
          auto neighborhood = chs_in_range(i);
          auto r = handle_send_failure(std::move(nodes_[i]), *target, neighborhood);
          nodes_[i] = std::move(r.state);
          for (const auto& a : r.out) {
            const double d = distance(kin_[i].position, kin_[*a.payload].position);
            const auto lvl = try_min_power_level(d, params_.table, Band::intra);
            unicast_announcement(a, i, *a.payload,
                                 lvl.value_or(params_.table.intra_max_level));
          }
        }
      }
    }
  }

  clock_ = data_start + sched.t_p;
  trace("round_boundary", kNone, kNone, "aggregate", 0.0);

  // End-of-round aggregation toward the sink over the CH overlay.
  const Overlay overlay = build_current_overlay(params_.guards_enabled);
  unsigned aggregates_sent = 0;
  unsigned aggregates_delivered = 0;
  for (NodeId ch : overlay.ch_set) {
    ++aggregates_sent;
    if (forward_aggregate(overlay, ch, params_.data_bits)) ++aggregates_delivered;
  }

  if (params_.energy.idle_per_round > 0.0) {
    for (NodeId i = 0; i < params_.node_count; ++i) {
      if (ledger_.alive(i)) {
        debit(i, params_.energy.idle_per_round, "idle", static_cast<long>(i), kNone, "idle");
      }
    }
  }

  row.delivery_ratio = frames_generated == 0
                           ? 1.0
                           : static_cast<double>(frames_delivered) / frames_generated;
  row.aggregate_delivery_ratio =
      aggregates_sent == 0 ? 1.0
                           : static_cast<double>(aggregates_delivered) / aggregates_sent;
  row.ch_count = static_cast<unsigned>(snapshot_.ch_set.size());
  unsigned max_size = 0;
  if (!snapshot_.ch_set.empty()) {
    std::map<NodeId, unsigned> sizes;
    for (NodeId ch : snapshot_.ch_set) sizes[ch] = 1;  // the CH itself
    for (const auto& [member, ch] : snapshot_.membership) ++sizes[ch];
    double sum = 0.0;
    for (const auto& [ch, n] : sizes) {
      sum += n;
      max_size = std::max(max_size, n);
    }
    row.mean_cluster_size = sum / static_cast<double>(sizes.size());
  }
  row.max_cluster_size = max_size;
  row.energy_consumed_j = ledger_.total_debited() - baseline_debit;
  row.alive_count = static_cast<unsigned>(ledger_.alive_count());
  unsigned orphans = 0;
  for (NodeId i = 0; i < params_.node_count; ++i) {
    if (ledger_.alive(i) && nodes_[i].orphaned) ++orphans;
  }
  row.orphan_count = orphans;

  row.max_member_loss_after_failure = 0;
  row.min_member_delivered_after_failure =
      affected.empty() ? 0 : std::numeric_limits<unsigned>::max();
  for (const auto& [member, stats] : affected) {
    row.max_member_loss_after_failure =
        std::max(row.max_member_loss_after_failure, stats.lost);
    row.min_member_delivered_after_failure =
        std::min(row.min_member_delivered_after_failure, stats.delivered);
  }
  return row;
}

MetricsRecord Simulation::run_round(unsigned round_index) {
  trace("round_boundary", kNone, kNone, "begin", 0.0);
  const double baseline = ledger_.total_debited();
  run_clustering_epoch();
  MetricsRecord row = run_data_round(round_index);
  row.energy_consumed_j = ledger_.total_debited() - baseline;
  return row;
}

std::vector<MetricsRecord> Simulation::run_all_rounds() {
  std::vector<MetricsRecord> rows;
  rows.reserve(params_.rounds);
  for (unsigned r = 0; r < params_.rounds; ++r) rows.push_back(run_round(r));
  return rows;
}

}  // namespace mecp
