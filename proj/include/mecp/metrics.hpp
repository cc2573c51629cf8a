// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace mecp {

// One row per (seed, round). The CSV columns are exactly the fields up to
// recovery_frames_lost; the trailing diagnostics feed the failover checks and
// are not serialized.
struct MetricsRecord {
  std::uint64_t seed{};
  unsigned round{};
  double delivery_ratio{1.0};            // member frames delivered / generated
  double aggregate_delivery_ratio{1.0};  // CH aggregates reaching the sink
  unsigned ch_count{};
  double mean_cluster_size{};
  unsigned max_cluster_size{};
  unsigned clustering_iterations_max{};
  double energy_consumed_j{};
  unsigned alive_count{};
  unsigned orphan_count{};
  unsigned recovery_frames_lost{};  // member frames lost after a CH death

  // diagnostics (not in the CSV)
  unsigned ch_failures{};                        // CH deaths observed this round
  unsigned max_member_loss_after_failure{};      // worst per-member loss, failed clusters
  unsigned min_member_delivered_after_failure{}; // fewest post-failure deliveries
  bool ach_recovery_applicable{false};           // a failed CH had a reachable ACH
};

inline constexpr const char* kMetricsCsvVersion = "mecpsim-metrics-v1";

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& rows);

}  // namespace mecp
