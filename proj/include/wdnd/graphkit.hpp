#pragma once

// Graph utilities over the pipe network: reservoir shortest-path tree,
// protected pipe list, BFS distance levels and cycle bases.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wdnd/network.hpp"

namespace wdnd {

struct SptResult {
  std::vector<double> dist;                        // length to nearest reservoir
  std::vector<std::optional<PipeIndex>> parent_pipe;  // none for reservoirs
};

/// Multi-source Dijkstra from every reservoir, weights = pipe length.
/// Equal-distance alternatives resolve to the smaller pipe index.
SptResult shortest_path_tree(const Network& net);

/// Pipes on the SPT paths of the junctions whose base demand lies in
/// [d_max - alpha (d_max - d_min), d_max]. Returned as an ascending pipe list.
std::vector<PipeIndex> path_list(const Network& net, const SptResult& spt, double alpha);

/// Pipe -> distance level (1-based) of a BFS seeded at `seeds`.
/// A pipe's level is 1 + the smaller BFS depth of its endpoints.
class LevelMap {
 public:
  explicit LevelMap(std::vector<int> levels) : levels_(std::move(levels)) {}
  int level(PipeIndex p) const { return levels_.at(p); }
  int max_level() const;
  std::size_t size() const { return levels_.size(); }

 private:
  std::vector<int> levels_;
};

LevelMap bfs_levels(const Network& net, std::span<const NodeIndex> seeds);

/// |E| - |V| + number of connected components.
std::size_t cycle_space_dim(const Network& net);

/// Fundamental cycles of a BFS spanning forest, one per non-tree pipe.
/// Each cycle is a closed walk starting and ending at the non-tree pipe's `from` node.
std::vector<Cycle> fundamental_cycles(const Network& net);

}  // namespace wdnd
