// SPDX-License-Identifier: Apache-2.0
//
// Per-node MECP state machine: cluster-head probability and cost formulas,
// the four clustering phases, assistant-CH selection and CH-failure recovery.
// Everything here is a pure function of its inputs; no transport, no clock.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mecp/geometry.hpp"

namespace mecp {

using NodeId = std::uint32_t;

// Sentinel cost for isolated nodes / unknown neighbors. Nobody prefers a
// node with this cost over a real candidate, but least_cost still works.
inline constexpr double kMaxCost = 1e30;

// Tolerance for the "CH_prob reached 1" test; the min-clamp makes the value
// exact but repeated doubling of arbitrary floats may land just below.
inline constexpr double kProbEps = 1e-12;

enum class Role { undecided, tentative_ch, final_ch, member };

enum class RoleTag { unknown, tentative_ch, final_ch };

struct NeighborEntry {
  NodeId id{};
  double cost{kMaxCost};     // neighbor's advertised cost; kMaxCost until heard
  std::size_t min_power{};   // smallest intra-band power level reaching it
  double min_power_mw{};     // transmit power at that level, milliwatts
  double relative_speed{};   // |v_me - v_neighbor|, m/s
  RoleTag role_tag{RoleTag::unknown};
};

struct CandidateEntry {
  NodeId id{};
  double cost{};
  RoleTag tag{RoleTag::unknown};
};

struct MemberEntry {
  NodeId id{};
  double cost{};
};

enum class AnnouncementKind { tentative_ch, final_ch, join, ach_decl, cost_velocity };

struct Announcement {
  AnnouncementKind kind{};
  NodeId sender{};
  double cost{};
  std::optional<NodeId> payload;  // join: target CH; ach_decl: the ACH id
  std::optional<Vec2> velocity;   // cost_velocity: sender's velocity, m/s
};

enum class CostMode { inverse_degree, degree, ccf };

struct ProtocolConfig {
  double k_fraction{0.1};        // initial CH percentage K
  double p_min{1.0 / 1024.0};    // lower clamp for ch_prob
  double e_max{2.0};             // battery capacity, joules
  CostMode cost_mode{CostMode::inverse_degree};
  bool heed_mode{false};         // force VF = 1 (mobility-blind baseline)
  double va_threshold{1.0};      // m/s below which VF = 1
  bool ach_enabled{true};

  friend bool operator==(const ProtocolConfig&, const ProtocolConfig&) = default;
};

struct NodeState {
  NodeId me{};
  Role role{Role::undecided};
  std::vector<NeighborEntry> l_adj;
  std::vector<CandidateEntry> l_ch;    // heard tentative/final declarations
  std::vector<MemberEntry> l_members;  // joins addressed to me (when CH)
  std::optional<NodeId> my_ch;
  std::optional<NodeId> my_ach;
  bool is_ach{false};
  bool sending_to_ach{false};  // member fell back to the ACH after CH failure
  bool orphaned{false};
  double ch_prob{0.0};
  double ch_prev{0.0};
  double e_res{0.0};
  double cost{kMaxCost};
  unsigned iteration{0};
  bool phase2_done{false};

  // Where this member's next data frame goes; empty if orphaned or not a member.
  std::optional<NodeId> data_target() const {
    if (orphaned) return std::nullopt;
    return sending_to_ach ? my_ach : my_ch;
  }
};

// --- formulas ---------------------------------------------------------------

// Mean minimum transmit power over the neighbor set (communication cost factor).
double compute_ccf(std::span<const double> min_powers);

// Mean relative speed over the neighbor set.
double compute_va(std::span<const double> relative_speeds);

// Velocity factor in (0,1]: 1 below the threshold, threshold/va above it.
double compute_vf(double va, double va_threshold);

// K * E_res/E_max * VF, clamped to [p_min, 1]. heed_mode forces VF = 1.
double compute_ch_prob(const ProtocolConfig& cfg, double e_res, double vf);

// Communication cost of this node per the configured mode. degree = 0 yields
// the kMaxCost sentinel in every mode.
double node_cost(const ProtocolConfig& cfg, std::size_t degree, double ccf);

// Minimum-cost candidate, ties broken by smallest id.
NodeId least_cost(std::span<const std::pair<NodeId, double>> candidates);
NodeId least_cost(std::span<const CandidateEntry> candidates);
NodeId least_cost(std::span<const MemberEntry> candidates);

// Iteration bound for the doubling phase: ceil(log2(1/p_min)) + 1.
unsigned max_iterations(double p_min);

// --- phases -----------------------------------------------------------------

struct Phase1Result {
  NodeState state;
  Announcement broadcast;  // cost_velocity
};

Phase1Result init_phase1(NodeId me, std::vector<NeighborEntry> neighbors,
                         const ProtocolConfig& cfg, double e_res, Vec2 my_velocity);

// Merge received declarations into local lists. tentative/final update l_ch
// (a final tag is never downgraded), join adds to l_members when addressed to
// this node, ach_decl from my_ch records the ACH, cost_velocity fills l_adj
// entry costs.
void absorb_announcements(NodeState& state, std::span<const Announcement> inbox);

struct Phase2Result {
  NodeState state;
  std::vector<Announcement> out;
  bool done{false};
};

Phase2Result step_phase2(NodeState state, std::span<const Announcement> inbox,
                         double rng_draw);

struct Phase3Result {
  NodeState state;
  std::vector<Announcement> out;
};

Phase3Result finalize_phase3(NodeState state);

struct AchResult {
  NodeState state;
  std::optional<Announcement> out;
};

AchResult select_ach(NodeState state);

struct FailureResult {
  NodeState state;
  std::vector<Announcement> out;
};

FailureResult handle_send_failure(NodeState state, NodeId failed_target,
                                  std::span<const std::pair<NodeId, double>> neighborhood_chs);

}  // namespace mecp
