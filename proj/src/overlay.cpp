// SPDX-License-Identifier: Apache-2.0
#include "mecp/overlay.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace mecp {

std::optional<NodeId> Overlay::guard_between(NodeId x, NodeId y) const {
  const NodeId lo = std::min(x, y);
  const NodeId hi = std::max(x, y);
  for (const auto& g : guard_edges) {
    if (g.a == lo && g.b == hi) return g.guard;
  }
  return std::nullopt;
}

bool Overlay::sink_reachable_from(NodeId ch) const {
  return std::find(sink_attached.begin(), sink_attached.end(), ch) != sink_attached.end() ||
         sink_guards.count(ch) > 0;
}

namespace {

// Best guard between two points: alive, within inter range of both, minimal
// max-distance to either endpoint, ties by smallest id.
std::optional<NodeId> pick_guard(Vec2 pa, Vec2 pb, const OverlayWorld& world,
                                 double inter_range, NodeId skip_a, NodeId skip_b) {
  std::optional<NodeId> best;
  double best_metric = std::numeric_limits<double>::infinity();
  for (NodeId g : world.all_nodes) {
    if (g == skip_a || g == skip_b || !world.alive(g)) continue;
    const Vec2 pg = world.position(g);
    const double da = distance(pg, pa);
    const double db = distance(pg, pb);
    if (da > inter_range || db > inter_range) continue;
    const double metric = std::max(da, db);
    if (metric < best_metric || (metric == best_metric && best && g < *best)) {
      best = g;
      best_metric = metric;
    }
  }
  return best;
}

}  // namespace

Overlay build_overlay(const std::vector<NodeId>& ch_set, const OverlayWorld& world,
                      const PowerTable& table, bool guards_enabled) {
  Overlay o;
  o.ch_set = ch_set;
  std::sort(o.ch_set.begin(), o.ch_set.end());
  const double inter_range = table.inter_range();

  for (std::size_t i = 0; i < o.ch_set.size(); ++i) {
    for (std::size_t j = i + 1; j < o.ch_set.size(); ++j) {
      const NodeId a = o.ch_set[i];
      const NodeId b = o.ch_set[j];
      const Vec2 pa = world.position(a);
      const Vec2 pb = world.position(b);
      if (distance(pa, pb) <= inter_range) {
        o.edges.insert({a, b});
      } else if (guards_enabled) {
        if (auto g = pick_guard(pa, pb, world, inter_range, a, b)) {
          o.guard_edges.push_back({a, *g, b});
        }
      }
    }
  }

  for (NodeId ch : o.ch_set) {
    const Vec2 p = world.position(ch);
    if (distance(p, world.sink) <= inter_range) {
      o.sink_attached.push_back(ch);
    } else if (guards_enabled) {
      if (auto g = pick_guard(p, world.sink, world, inter_range, ch, ch)) {
        o.sink_guards.emplace(ch, *g);
      }
    }
  }
  return o;
}

Route route_to_sink(const Overlay& overlay, NodeId src_ch) {
  if (std::find(overlay.ch_set.begin(), overlay.ch_set.end(), src_ch) ==
      overlay.ch_set.end()) {
    throw std::invalid_argument("route_to_sink: src is not a cluster head");
  }

  // Sorted adjacency over direct + guard edges.
  std::map<NodeId, std::vector<NodeId>> adj;
  for (NodeId ch : overlay.ch_set) adj[ch];
  for (const auto& [a, b] : overlay.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (const auto& g : overlay.guard_edges) {
    adj[g.a].push_back(g.b);
    adj[g.b].push_back(g.a);
  }
  for (auto& [ch, ns] : adj) std::sort(ns.begin(), ns.end());

  // Distance-to-target BFS from every sink-reachable CH, then a greedy walk
  // from src picking the smallest next hop that decreases the distance.
  constexpr unsigned kInf = std::numeric_limits<unsigned>::max();
  std::map<NodeId, unsigned> dist;
  for (NodeId ch : overlay.ch_set) dist[ch] = kInf;
  std::deque<NodeId> queue;
  for (NodeId ch : overlay.ch_set) {
    if (overlay.sink_reachable_from(ch)) {
      dist[ch] = 0;
      queue.push_back(ch);
    }
  }
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : adj[u]) {
      if (dist[v] == kInf) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }

  Route route;
  if (dist[src_ch] == kInf) return route;  // partitioned
  route.partitioned = false;
  route.hops.push_back({src_ch, std::nullopt});
  NodeId cur = src_ch;
  while (dist[cur] > 0) {
    NodeId next = cur;
    for (NodeId v : adj[cur]) {
      if (dist[v] == dist[cur] - 1) {
        next = v;
        break;  // adjacency sorted: first hit is the smallest id
      }
    }
    route.hops.push_back({next, overlay.guard_between(cur, next)});
    cur = next;
  }
  const auto it = overlay.sink_guards.find(cur);
  if (it != overlay.sink_guards.end() &&
      std::find(overlay.sink_attached.begin(), overlay.sink_attached.end(), cur) ==
          overlay.sink_attached.end()) {
    route.sink_guard = it->second;
  }
  return route;
}

}  // namespace mecp
