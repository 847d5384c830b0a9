#include "wdnd/graphkit.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <tuple>

#include "wdnd/errors.hpp"

namespace wdnd {

SptResult shortest_path_tree(const Network& net) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr PipeIndex kNoPipe = std::numeric_limits<PipeIndex>::max();
  const std::size_t n = net.node_count();

  SptResult out;
  out.dist.assign(n, kInf);
  out.parent_pipe.assign(n, std::nullopt);

  // (distance, parent pipe, node); the parent pipe in the key makes the
  // smaller pipe index win between equal-distance labels.
  using Label = std::tuple<double, PipeIndex, NodeIndex>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  std::vector<PipeIndex> best_parent(n, kNoPipe);
  std::vector<bool> settled(n, false);
  for (NodeIndex r : net.reservoirs()) {
    out.dist[r] = 0.0;
    heap.emplace(0.0, kNoPipe, r);
  }
  while (!heap.empty()) {
    auto [d, via, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    settled[u] = true;
    if (via != kNoPipe) out.parent_pipe[u] = via;
    for (PipeIndex p : net.incident_pipes(u)) {
      NodeIndex v = net.pipe(p).other_end(u);
      if (settled[v]) continue;
      double candidate = d + net.pipe(p).length_m;
      if (candidate < out.dist[v] || (candidate == out.dist[v] && p < best_parent[v])) {
        out.dist[v] = candidate;
        best_parent[v] = p;
        heap.emplace(candidate, p, v);
      }
    }
  }
  for (NodeIndex v = 0; v < n; ++v)
    if (!settled[v]) throw InstanceError("node '" + net.node(v).id + "' cannot reach a reservoir");
  return out;
}

std::vector<PipeIndex> path_list(const Network& net, const SptResult& spt, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw ContractViolation("alpha must lie in [0, 1]");
  const auto junctions = net.junctions();
  if (junctions.empty()) return {};

  std::vector<double> base(junctions.size());
  for (std::size_t i = 0; i < junctions.size(); ++i)
    base[i] = base_demand(net.node(junctions[i]), net.demand_model());
  const auto [lo, hi] = std::minmax_element(base.begin(), base.end());
  const double threshold = *hi - alpha * (*hi - *lo);

  std::vector<bool> chosen(net.pipe_count(), false);
  for (std::size_t i = 0; i < junctions.size(); ++i) {
    if (base[i] < threshold) continue;
    NodeIndex v = junctions[i];
    while (spt.parent_pipe[v]) {
      PipeIndex p = *spt.parent_pipe[v];
      if (chosen[p]) break;  // rest of the path is already in
      chosen[p] = true;
      v = net.pipe(p).other_end(v);
    }
  }
  std::vector<PipeIndex> out;
  for (PipeIndex p = 0; p < chosen.size(); ++p)
    if (chosen[p]) out.push_back(p);
  return out;
}

int LevelMap::max_level() const {
  return levels_.empty() ? 0 : *std::max_element(levels_.begin(), levels_.end());
}

LevelMap bfs_levels(const Network& net, std::span<const NodeIndex> seeds) {
  constexpr int kUnseen = -1;
  std::vector<int> depth(net.node_count(), kUnseen);
  std::queue<NodeIndex> frontier;
  for (NodeIndex s : seeds) {
    if (s >= net.node_count()) throw ContractViolation("BFS seed node out of range");
    if (depth[s] == kUnseen) {
      depth[s] = 0;
      frontier.push(s);
    }
  }
  while (!frontier.empty()) {
    NodeIndex u = frontier.front();
    frontier.pop();
    for (PipeIndex p : net.incident_pipes(u)) {
      NodeIndex v = net.pipe(p).other_end(u);
      if (depth[v] == kUnseen) {
        depth[v] = depth[u] + 1;
        frontier.push(v);
      }
    }
  }
  std::vector<int> levels(net.pipe_count());
  for (PipeIndex p = 0; p < net.pipe_count(); ++p) {
    const Pipe& pipe = net.pipe(p);
    levels[p] = 1 + std::min(depth[pipe.from], depth[pipe.to]);
  }
  return LevelMap(std::move(levels));
}

namespace {

// BFS spanning forest: parent pipe per node and the component count.
struct Forest {
  std::vector<std::optional<PipeIndex>> parent;
  std::vector<std::size_t> depth;
  std::vector<bool> tree_pipe;
  std::size_t components = 0;
};

Forest spanning_forest(const Network& net) {
  Forest f;
  f.parent.assign(net.node_count(), std::nullopt);
  f.depth.assign(net.node_count(), 0);
  f.tree_pipe.assign(net.pipe_count(), false);
  std::vector<bool> seen(net.node_count(), false);
  for (NodeIndex root = 0; root < net.node_count(); ++root) {
    if (seen[root]) continue;
    ++f.components;
    seen[root] = true;
    std::queue<NodeIndex> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
      NodeIndex u = frontier.front();
      frontier.pop();
      for (PipeIndex p : net.incident_pipes(u)) {
        NodeIndex v = net.pipe(p).other_end(u);
        if (seen[v]) continue;
        seen[v] = true;
        f.parent[v] = p;
        f.depth[v] = f.depth[u] + 1;
        f.tree_pipe[p] = true;
        frontier.push(v);
      }
    }
  }
  return f;
}

OrientedPipe traverse(const Network& net, PipeIndex p, NodeIndex from_node) {
  return {p, net.pipe(p).from == from_node ? 1 : -1};
}

}  // namespace

std::size_t cycle_space_dim(const Network& net) {
  const Forest f = spanning_forest(net);
  return net.pipe_count() + f.components - net.node_count();
}

std::vector<Cycle> fundamental_cycles(const Network& net) {
  const Forest f = spanning_forest(net);
  std::vector<Cycle> cycles;
  for (PipeIndex p = 0; p < net.pipe_count(); ++p) {
    if (f.tree_pipe[p]) continue;
    const Pipe& closing = net.pipe(p);
    // Walk from -> to along the closing pipe, then back to `from` through the tree.
    Cycle cycle{{p, 1}};
    NodeIndex a = closing.to;
    NodeIndex b = closing.from;
    Cycle down;  // from `b` upward, reversed later
    while (a != b) {
      if (f.depth[a] >= f.depth[b]) {
        PipeIndex up = *f.parent[a];
        cycle.push_back(traverse(net, up, a));
        a = net.pipe(up).other_end(a);
      } else {
        PipeIndex up = *f.parent[b];
        NodeIndex next = net.pipe(up).other_end(b);
        down.push_back(traverse(net, up, next));
        b = next;
      }
    }
    cycle.insert(cycle.end(), down.rbegin(), down.rend());
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

}  // namespace wdnd
