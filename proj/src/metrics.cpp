// SPDX-License-Identifier: Apache-2.0
#include "mecp/metrics.hpp"

#include <cinttypes>
#include <cstdio>

namespace mecp {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRecord>& rows) {
  out << "# " << kMetricsCsvVersion << "\n";
  out << "seed,round,delivery_ratio,aggregate_delivery_ratio,ch_count,"
         "mean_cluster_size,max_cluster_size,clustering_iterations_max,"
         "energy_consumed_j,alive_count,orphan_count,recovery_frames_lost\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << r.round << ',' << fmt(r.delivery_ratio) << ','
        << fmt(r.aggregate_delivery_ratio) << ',' << r.ch_count << ','
        << fmt(r.mean_cluster_size) << ',' << r.max_cluster_size << ','
        << r.clustering_iterations_max << ',' << fmt(r.energy_consumed_j) << ','
        << r.alive_count << ',' << r.orphan_count << ',' << r.recovery_frames_lost
        << '\n';
  }
}

}  // namespace mecp
