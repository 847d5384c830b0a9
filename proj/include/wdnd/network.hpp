#pragma once

// Domain model: pipe catalog, nodes, pipes, demand horizon and solutions.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wdnd {

using NodeIndex = std::size_t;
using PipeIndex = std::size_t;
/// 1-based position of a pipe type in the catalog.
using TypeIndex = int;

struct PipeType {
  TypeIndex index = 0;
  double diameter_mm = 0.0;
  double roughness = 0.0;  // Hazen-Williams C
  double unit_cost = 0.0;  // money per meter

  double diameter_m() const { return diameter_mm / 1000.0; }
  bool operator==(const PipeType&) const = default;
};

/// Ordered list of available pipe types. Diameters and costs are
/// nondecreasing with the index; duplicate rows are kept as they are.
class PipeTypeCatalog {
 public:
  explicit PipeTypeCatalog(std::vector<PipeType> types);

  int size() const { return static_cast<int>(types_.size()); }
  /// Largest index, |T|.
  TypeIndex largest() const { return size(); }
  const PipeType& at(TypeIndex index) const;
  std::span<const PipeType> types() const { return types_; }

 private:
  std::vector<PipeType> types_;
};

enum class NodeKind { junction, reservoir };

struct DemandCategory {
  double base_load = 0.0;  // m^3/s
  std::string pattern_id;  // empty: constant multiplier 1
  bool operator==(const DemandCategory&) const = default;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::junction;
  double elevation = 0.0;
  std::optional<double> fixed_head;  // reservoirs only
  std::vector<DemandCategory> demands;

  bool is_reservoir() const { return kind == NodeKind::reservoir; }
  bool operator==(const Node&) const = default;
};

struct Pipe {
  std::string id;
  NodeIndex from = 0;  // reference orientation: from -> to
  NodeIndex to = 0;
  double length_m = 0.0;

  NodeIndex other_end(NodeIndex n) const { return n == from ? to : from; }
  bool operator==(const Pipe&) const = default;
};

/// A pipe traversed either along (+1) or against (-1) its reference orientation.
struct OrientedPipe {
  PipeIndex pipe = 0;
  int direction = 1;
  bool operator==(const OrientedPipe&) const = default;
};
using Cycle = std::vector<OrientedPipe>;

inline constexpr std::size_t kDefaultPeriodCount = 24;

class DemandModel {
 public:
  DemandModel() = default;
  DemandModel(std::map<std::string, std::vector<double>> patterns, std::size_t period_count);

  std::size_t period_count() const { return period_count_; }
  const std::map<std::string, std::vector<double>>& patterns() const { return patterns_; }
  bool has_pattern(std::string_view id) const;

  /// Multiplier of `pattern_id` at 1-based period `period`. Short patterns wrap.
  double multiplier(std::string_view pattern_id, std::size_t period) const;

  bool operator==(const DemandModel&) const = default;

 private:
  std::map<std::string, std::vector<double>> patterns_;
  std::size_t period_count_ = kDefaultPeriodCount;
};

/// Immutable water network. Construction validates ids, endpoints, lengths,
/// demand patterns and connectivity; pipe and node order is the file order
/// and doubles as the deterministic iteration order everywhere else.
class Network {
 public:
  Network(std::vector<Node> nodes, std::vector<Pipe> pipes, DemandModel demand_model);

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Pipe> pipes() const { return pipes_; }
  const Node& node(NodeIndex n) const { return nodes_.at(n); }
  const Pipe& pipe(PipeIndex p) const { return pipes_.at(p); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t pipe_count() const { return pipes_.size(); }

  const DemandModel& demand_model() const { return demand_model_; }
  std::size_t period_count() const { return demand_model_.period_count(); }

  std::span<const NodeIndex> junctions() const { return junctions_; }
  std::span<const NodeIndex> reservoirs() const { return reservoirs_; }
  /// Pipes touching `n`, ascending by pipe index.
  std::span<const PipeIndex> incident_pipes(NodeIndex n) const { return incidence_.at(n); }

  std::optional<NodeIndex> find_node(std::string_view id) const;
  std::optional<PipeIndex> find_pipe(std::string_view id) const;

  /// Precomputed demand of node `n` at 1-based period `period` (m^3/s).
  double demand(NodeIndex n, std::size_t period) const;
  double total_demand(std::size_t period) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Pipe> pipes_;
  DemandModel demand_model_;
  std::vector<NodeIndex> junctions_;
  std::vector<NodeIndex> reservoirs_;
  std::vector<std::vector<PipeIndex>> incidence_;
  std::unordered_map<std::string, NodeIndex> node_lookup_;
  std::unordered_map<std::string, PipeIndex> pipe_lookup_;
  std::vector<double> demand_table_;  // period-major, period_count x node_count
  std::vector<double> total_demand_;
};

/// Assignment of one catalog type to every pipe, indexed by PipeIndex.
class Solution {
 public:
  Solution() = default;
  Solution(std::size_t pipe_count, TypeIndex uniform_type) : types_(pipe_count, uniform_type) {}
  explicit Solution(std::vector<TypeIndex> types) : types_(std::move(types)) {}

  std::size_t size() const { return types_.size(); }
  TypeIndex operator[](PipeIndex p) const { return types_[p]; }
  TypeIndex& operator[](PipeIndex p) { return types_[p]; }
  TypeIndex at(PipeIndex p) const { return types_.at(p); }
  std::span<const TypeIndex> types() const { return types_; }

  bool operator==(const Solution&) const = default;

 private:
  std::vector<TypeIndex> types_;
};

/// Throws ContractViolation unless `s` assigns a valid type to every pipe of `net`.
void check_solution(const Solution& s, const Network& net, const PipeTypeCatalog& cat);

/// Sum over pipes of unit cost times length.
double solution_cost(const Solution& s, const Network& net, const PipeTypeCatalog& cat);

/// Cost of a single pipe under `s`.
double pipe_cost(const Solution& s, PipeIndex p, const Network& net, const PipeTypeCatalog& cat);

/// Demand of `node` at 1-based period `period`; reservoirs return 0.
double demand_at(const Node& node, std::size_t period, const DemandModel& dm);

/// Smallest demand of a junction over the horizon.
double base_demand(const Node& node, const DemandModel& dm);

/// Meshedness coefficient |cycle space| / (2|V| - 5).
double meshedness(const Network& net);

}  // namespace wdnd
