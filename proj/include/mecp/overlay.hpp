// SPDX-License-Identifier: Apache-2.0
//
// Inter-cluster overlay: CH-to-CH edges at the inter power band, guard-node
// bridges for CH pairs out of mutual range, and hop-count routing to the sink.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "mecp/geometry.hpp"
#include "mecp/protocol.hpp"
#include "mecp/radio.hpp"

namespace mecp {

struct GuardEdge {
  NodeId a{};
  NodeId guard{};
  NodeId b{};
};

struct Overlay {
  std::vector<NodeId> ch_set;
  std::set<std::pair<NodeId, NodeId>> edges;      // normalized (min, max) CH pairs
  std::vector<GuardEdge> guard_edges;             // normalized a < b
  std::vector<NodeId> sink_attached;              // CHs in direct inter range of sink
  std::map<NodeId, NodeId> sink_guards;           // CH -> guard bridging to sink

  bool has_edge(NodeId x, NodeId y) const {
    return edges.count({std::min(x, y), std::max(x, y)}) > 0;
  }
  std::optional<NodeId> guard_between(NodeId x, NodeId y) const;
  bool sink_reachable_from(NodeId ch) const;
};

// Views into the world the overlay is built from; kept as callables so the
// module stays independent of the event engine.
struct OverlayWorld {
  std::function<Vec2(NodeId)> position;
  std::function<bool(NodeId)> alive;
  std::vector<NodeId> all_nodes;  // candidates for guard duty
  Vec2 sink;
};

// Direct edges between CH pairs within inter range; for disconnected pairs,
// a guard edge through the alive common node minimizing the larger of its two
// CH distances (ties by smallest id). Sink attachment follows the same rule.
Overlay build_overlay(const std::vector<NodeId>& ch_set, const OverlayWorld& world,
                      const PowerTable& table, bool guards_enabled);

struct RouteHop {
  NodeId ch{};
  std::optional<NodeId> guard_to_here;  // guard relaying from the previous hop
};

struct Route {
  bool partitioned{true};
  std::vector<RouteHop> hops;            // src first, sink-attached CH last
  std::optional<NodeId> sink_guard;      // guard for the final CH-to-sink hop
};

// Shortest hop-count path to any sink-attached CH; a guard edge counts as one
// logical hop. Ties broken by smallest next-hop id.
Route route_to_sink(const Overlay& overlay, NodeId src_ch);

}  // namespace mecp
