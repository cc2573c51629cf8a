// SPDX-License-Identifier: Apache-2.0
#include "mecp/protocol.hpp"

#include <algorithm>
#include <cmath>

namespace mecp {

double compute_ccf(std::span<const double> min_powers) {
  if (min_powers.empty()) throw std::invalid_argument("compute_ccf: no neighbors");
  double sum = 0.0;
  for (double p : min_powers) sum += p;
  return sum / static_cast<double>(min_powers.size());
}

double compute_va(std::span<const double> relative_speeds) {
  if (relative_speeds.empty()) throw std::invalid_argument("compute_va: no neighbors");
  double sum = 0.0;
  for (double v : relative_speeds) sum += v;
  return sum / static_cast<double>(relative_speeds.size());
}

double compute_vf(double va, double va_threshold) {
  return va < va_threshold ? 1.0 : va_threshold / va;
}

double compute_ch_prob(const ProtocolConfig& cfg, double e_res, double vf) {
  if (e_res > cfg.e_max) throw std::invalid_argument("compute_ch_prob: energy exceeds capacity");
  const double effective_vf = cfg.heed_mode ? 1.0 : vf;
  const double p = cfg.k_fraction * (e_res / cfg.e_max) * effective_vf;
  return std::clamp(p, cfg.p_min, 1.0);
}

double node_cost(const ProtocolConfig& cfg, std::size_t degree, double ccf) {
  if (degree == 0) return kMaxCost;
  switch (cfg.cost_mode) {
    case CostMode::inverse_degree:
      return 1.0 / static_cast<double>(degree);
    case CostMode::degree:
      return static_cast<double>(degree);
    case CostMode::ccf:
      return ccf;
  }
  return kMaxCost;
}

namespace {

template <class T, class CostOf, class IdOf>
NodeId least_cost_impl(std::span<const T> candidates, CostOf cost_of, IdOf id_of) {
  if (candidates.empty()) throw std::invalid_argument("least_cost: no candidates");
  const T* best = &candidates[0];
  for (const T& c : candidates.subspan(1)) {
    if (cost_of(c) < cost_of(*best) ||
        (cost_of(c) == cost_of(*best) && id_of(c) < id_of(*best))) {
      best = &c;
    }
  }
  return id_of(*best);
}

}  // namespace

NodeId least_cost(std::span<const std::pair<NodeId, double>> candidates) {
  return least_cost_impl(candidates, [](const auto& c) { return c.second; },
                         [](const auto& c) { return c.first; });
}

NodeId least_cost(std::span<const CandidateEntry> candidates) {
  return least_cost_impl(candidates, [](const auto& c) { return c.cost; },
                         [](const auto& c) { return c.id; });
}

NodeId least_cost(std::span<const MemberEntry> candidates) {
  return least_cost_impl(candidates, [](const auto& c) { return c.cost; },
                         [](const auto& c) { return c.id; });
}

unsigned max_iterations(double p_min) {
  if (p_min <= 0.0 || p_min > 1.0) throw std::invalid_argument("max_iterations: p_min out of range");
  // Small slack so exact powers of two do not round up one extra step.
  const double steps = std::ceil(std::log2(1.0 / p_min) - 1e-9);
  return static_cast<unsigned>(steps) + 1;
}

Phase1Result init_phase1(NodeId me, std::vector<NeighborEntry> neighbors,
                         const ProtocolConfig& cfg, double e_res, Vec2 my_velocity) {
  NodeState st;
  st.me = me;
  st.role = Role::undecided;
  st.e_res = e_res;

  double va = 0.0;
  double ccf = 0.0;
  if (!neighbors.empty()) {
    std::vector<double> speeds;
    std::vector<double> powers;
    speeds.reserve(neighbors.size());
    powers.reserve(neighbors.size());
    for (const auto& n : neighbors) {
      speeds.push_back(n.relative_speed);
      powers.push_back(n.min_power_mw);
    }
    va = compute_va(speeds);
    ccf = compute_ccf(powers);
  }
  const double vf = compute_vf(va, cfg.va_threshold);
  st.ch_prob = compute_ch_prob(cfg, e_res, vf);
  st.cost = node_cost(cfg, neighbors.size(), ccf);
  st.l_adj = std::move(neighbors);

  Announcement a;
  a.kind = AnnouncementKind::cost_velocity;
  a.sender = me;
  a.cost = st.cost;
  a.velocity = my_velocity;
  return {std::move(st), a};
}

void absorb_announcements(NodeState& state, std::span<const Announcement> inbox) {
  for (const Announcement& a : inbox) {
    switch (a.kind) {
      case AnnouncementKind::cost_velocity: {
        for (auto& n : state.l_adj) {
          if (n.id == a.sender) n.cost = a.cost;
        }
        break;
      }
      case AnnouncementKind::tentative_ch:
      case AnnouncementKind::final_ch: {
        const RoleTag tag = a.kind == AnnouncementKind::final_ch ? RoleTag::final_ch
                                                                 : RoleTag::tentative_ch;
        auto it = std::find_if(state.l_ch.begin(), state.l_ch.end(),
                               [&](const CandidateEntry& c) { return c.id == a.sender; });
        if (it == state.l_ch.end()) {
          state.l_ch.push_back({a.sender, a.cost, tag});
        } else {
          it->cost = a.cost;
          if (tag == RoleTag::final_ch) it->tag = RoleTag::final_ch;
        }
        for (auto& n : state.l_adj) {
          if (n.id == a.sender && (tag == RoleTag::final_ch || n.role_tag == RoleTag::unknown)) {
            n.role_tag = tag;
          }
        }
        break;
      }
      case AnnouncementKind::join: {
        if (a.payload && *a.payload == state.me) {
          auto it = std::find_if(state.l_members.begin(), state.l_members.end(),
                                 [&](const MemberEntry& m) { return m.id == a.sender; });
          if (it == state.l_members.end()) {
            state.l_members.push_back({a.sender, a.cost});
          } else {
            it->cost = a.cost;
          }
        }
        break;
      }
      case AnnouncementKind::ach_decl: {
        if (state.my_ch && a.sender == *state.my_ch && a.payload) {
          state.my_ach = a.payload;
          state.is_ach = (*a.payload == state.me);
        }
        break;
      }
    }
  }
}

Phase2Result step_phase2(NodeState state, std::span<const Announcement> inbox,
                         double rng_draw) {
  if (state.phase2_done) throw std::logic_error("step_phase2: phase 2 already terminated");

  absorb_announcements(state, inbox);

  std::vector<Announcement> out;
  const auto declare = [&](AnnouncementKind kind) {
    out.push_back({kind, state.me, state.cost, std::nullopt, std::nullopt});
  };
  const auto upsert_self = [&](RoleTag tag) {
    auto it = std::find_if(state.l_ch.begin(), state.l_ch.end(),
                           [&](const CandidateEntry& c) { return c.id == state.me; });
    if (it == state.l_ch.end()) {
      state.l_ch.push_back({state.me, state.cost, tag});
    } else if (tag == RoleTag::final_ch) {
      it->tag = RoleTag::final_ch;
    }
  };

  if (!state.l_ch.empty()) {
    const NodeId winner = least_cost(std::span<const CandidateEntry>(state.l_ch));
    if (winner == state.me) {
      if (state.ch_prob >= 1.0 - kProbEps) {
        state.role = Role::final_ch;
        state.my_ch = state.me;
        declare(AnnouncementKind::final_ch);
        upsert_self(RoleTag::final_ch);
      } else {
        state.role = Role::tentative_ch;
        declare(AnnouncementKind::tentative_ch);
        upsert_self(RoleTag::tentative_ch);
      }
    }
  } else if (rng_draw < state.ch_prob) {
    state.role = Role::tentative_ch;
    declare(AnnouncementKind::tentative_ch);
    upsert_self(RoleTag::tentative_ch);
  }

  state.ch_prev = state.ch_prob;
  state.ch_prob = std::min(2.0 * state.ch_prob, 1.0);
  state.iteration += 1;
  const bool done = state.ch_prev >= 1.0 - kProbEps;
  state.phase2_done = done;
  return {std::move(state), std::move(out), done};
}

Phase3Result finalize_phase3(NodeState state) {
  std::vector<Announcement> out;
  if (state.role != Role::final_ch) {
    std::vector<CandidateEntry> l_fch;
    for (const auto& c : state.l_ch) {
      if (c.tag == RoleTag::final_ch && c.id != state.me) l_fch.push_back(c);
    }
    if (!l_fch.empty()) {
      state.role = Role::member;
      state.my_ch = least_cost(std::span<const CandidateEntry>(l_fch));
      out.push_back({AnnouncementKind::join, state.me, state.cost, state.my_ch, std::nullopt});
    } else {
      state.role = Role::final_ch;
      state.my_ch = state.me;
      out.push_back({AnnouncementKind::final_ch, state.me, state.cost, std::nullopt, std::nullopt});
    }
  } else {
    state.my_ch = state.me;
    out.push_back({AnnouncementKind::final_ch, state.me, state.cost, std::nullopt, std::nullopt});
  }
  return {std::move(state), std::move(out)};
}

AchResult select_ach(NodeState state) {
  if (state.role != Role::final_ch) throw std::logic_error("select_ach: not a cluster head");
  if (state.l_members.empty()) {
    state.my_ach.reset();
    return {std::move(state), std::nullopt};
  }
  const NodeId ach = least_cost(std::span<const MemberEntry>(state.l_members));
  state.my_ach = ach;
  double ach_cost = 0.0;
  for (const auto& m : state.l_members) {
    if (m.id == ach) ach_cost = m.cost;
  }
  Announcement a{AnnouncementKind::ach_decl, state.me, ach_cost, ach, std::nullopt};
  return {std::move(state), a};
}

FailureResult handle_send_failure(NodeState state, NodeId failed_target,
                                  std::span<const std::pair<NodeId, double>> neighborhood_chs) {
  if (state.role != Role::member) throw std::logic_error("handle_send_failure: not a member");
  const bool ch_failed = state.my_ch && failed_target == *state.my_ch;
  const bool ach_failed = state.my_ach && failed_target == *state.my_ach;
  if (!ch_failed && !ach_failed) {
    throw std::invalid_argument("handle_send_failure: target is neither my_ch nor my_ach");
  }

  std::vector<Announcement> out;
  if (ch_failed && state.my_ach && !state.sending_to_ach && *state.my_ach != failed_target) {
    // First fallback: address data frames to the assistant.
    state.sending_to_ach = true;
    return {std::move(state), std::move(out)};
  }

  if (!neighborhood_chs.empty()) {
    state.my_ch = least_cost(neighborhood_chs);
    state.my_ach.reset();
    state.sending_to_ach = false;
    out.push_back({AnnouncementKind::join, state.me, state.cost, state.my_ch, std::nullopt});
  } else {
    state.orphaned = true;
  }
  return {std::move(state), std::move(out)};
}

}  // namespace mecp
