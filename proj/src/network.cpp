#include "wdnd/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "wdnd/errors.hpp"
#include "wdnd/graphkit.hpp"

namespace wdnd {

PipeTypeCatalog::PipeTypeCatalog(std::vector<PipeType> types) : types_(std::move(types)) {
  if (types_.empty()) throw InstanceError("pipe type catalog is empty");
  for (std::size_t i = 0; i < types_.size(); ++i) {
    const PipeType& t = types_[i];
    const std::string where = "pipe type " + std::to_string(i + 1);
    if (t.index != static_cast<TypeIndex>(i + 1))
      throw InstanceError(where + ": index " + std::to_string(t.index) + " out of sequence");
    if (!(t.diameter_mm > 0.0) || !(t.roughness > 0.0) || !(t.unit_cost > 0.0))
      throw InstanceError(where + ": diameter, roughness and cost must be positive");
    if (i > 0) {
      const PipeType& prev = types_[i - 1];
      if (t.diameter_mm < prev.diameter_mm)
        throw InstanceError(where + ": diameters must be nondecreasing");
      if (t.unit_cost < prev.unit_cost)
        throw InstanceError(where + ": unit costs must be nondecreasing");
    }
  }
}

const PipeType& PipeTypeCatalog::at(TypeIndex index) const {
  if (index < 1 || index > size())
    throw ContractViolation("pipe type index " + std::to_string(index) + " outside 1.." +
                            std::to_string(size()));
  return types_[static_cast<std::size_t>(index - 1)];
}

DemandModel::DemandModel(std::map<std::string, std::vector<double>> patterns,
                         std::size_t period_count)
    : patterns_(std::move(patterns)), period_count_(period_count) {
  if (period_count_ == 0) throw InstanceError("period count must be positive");
  for (const auto& [id, values] : patterns_) {
    if (values.empty()) throw InstanceError("pattern '" + id + "' has no multipliers");
    for (double v : values)
      if (!(v >= 0.0)) throw InstanceError("pattern '" + id + "' has a negative multiplier");
  }
}

bool DemandModel::has_pattern(std::string_view id) const {
  return id.empty() || patterns_.find(std::string(id)) != patterns_.end();
}

double DemandModel::multiplier(std::string_view pattern_id, std::size_t period) const {
  if (period < 1 || period > period_count_)
    throw ContractViolation("period " + std::to_string(period) + " outside 1.." +
                            std::to_string(period_count_));
  if (pattern_id.empty()) return 1.0;
  auto it = patterns_.find(std::string(pattern_id));
  if (it == patterns_.end()) throw InstanceError("unknown pattern '" + std::string(pattern_id) + "'");
  const auto& values = it->second;
  return values[(period - 1) % values.size()];
}

double demand_at(const Node& node, std::size_t period, const DemandModel& dm) {
  if (period < 1 || period > dm.period_count())
    throw ContractViolation("period " + std::to_string(period) + " outside 1.." +
                            std::to_string(dm.period_count()));
  if (node.is_reservoir()) return 0.0;
  double total = 0.0;
  for (const DemandCategory& c : node.demands) total += c.base_load * dm.multiplier(c.pattern_id, period);
  return total;
}

double base_demand(const Node& node, const DemandModel& dm) {
  double lowest = demand_at(node, 1, dm);
  for (std::size_t tau = 2; tau <= dm.period_count(); ++tau)
    lowest = std::min(lowest, demand_at(node, tau, dm));
  return lowest;
}

Network::Network(std::vector<Node> nodes, std::vector<Pipe> pipes, DemandModel demand_model)
    : nodes_(std::move(nodes)), pipes_(std::move(pipes)), demand_model_(std::move(demand_model)) {
  for (NodeIndex n = 0; n < nodes_.size(); ++n) {
    const Node& node = nodes_[n];
    if (!node_lookup_.emplace(node.id, n).second)
      throw InstanceError("duplicate node id '" + node.id + "'");
    if (node.is_reservoir()) {
      if (!node.fixed_head) throw InstanceError("reservoir '" + node.id + "' has no fixed head");
      if (!node.demands.empty()) throw InstanceError("reservoir '" + node.id + "' has demands");
      reservoirs_.push_back(n);
    } else {
      if (node.fixed_head) throw InstanceError("junction '" + node.id + "' has a fixed head");
      for (const DemandCategory& c : node.demands) {
        if (!(c.base_load >= 0.0))
          throw InstanceError("junction '" + node.id + "' has a negative base load");
        if (!demand_model_.has_pattern(c.pattern_id))
          throw InstanceError("junction '" + node.id + "' references unknown pattern '" +
                              c.pattern_id + "'");
      }
      junctions_.push_back(n);
    }
  }
  if (reservoirs_.empty()) throw InstanceError("network has no reservoir");

  incidence_.resize(nodes_.size());
  for (PipeIndex p = 0; p < pipes_.size(); ++p) {
    const Pipe& pipe = pipes_[p];
    if (!pipe_lookup_.emplace(pipe.id, p).second)
      throw InstanceError("duplicate pipe id '" + pipe.id + "'");
    if (pipe.from >= nodes_.size() || pipe.to >= nodes_.size())
      throw InstanceError("pipe '" + pipe.id + "' references a missing node");
    if (pipe.from == pipe.to) throw InstanceError("pipe '" + pipe.id + "' is a self loop");
    if (!(pipe.length_m > 0.0)) throw InstanceError("pipe '" + pipe.id + "' has nonpositive length");
    incidence_[pipe.from].push_back(p);
    incidence_[pipe.to].push_back(p);
  }

  // Connectivity as an undirected graph.
  std::vector<bool> seen(nodes_.size(), false);
  std::queue<NodeIndex> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    NodeIndex u = frontier.front();
    frontier.pop();
    for (PipeIndex p : incidence_[u]) {
      NodeIndex v = pipes_[p].other_end(u);
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  if (reached != nodes_.size()) {
    auto it = std::find(seen.begin(), seen.end(), false);
    throw InstanceError("network is disconnected; node '" + nodes_[it - seen.begin()].id +
                        "' is unreachable");
  }

  const std::size_t periods = demand_model_.period_count();
  demand_table_.assign(periods * nodes_.size(), 0.0);
  total_demand_.assign(periods, 0.0);
  for (std::size_t tau = 1; tau <= periods; ++tau) {
    for (NodeIndex n : junctions_) {
      double d = demand_at(nodes_[n], tau, demand_model_);
      demand_table_[(tau - 1) * nodes_.size() + n] = d;
      total_demand_[tau - 1] += d;
    }
  }
}

std::optional<NodeIndex> Network::find_node(std::string_view id) const {
  auto it = node_lookup_.find(std::string(id));
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<PipeIndex> Network::find_pipe(std::string_view id) const {
  auto it = pipe_lookup_.find(std::string(id));
  if (it == pipe_lookup_.end()) return std::nullopt;
  return it->second;
}

double Network::demand(NodeIndex n, std::size_t period) const {
  if (period < 1 || period > period_count())
    throw ContractViolation("period " + std::to_string(period) + " outside 1.." +
                            std::to_string(period_count()));
  return demand_table_[(period - 1) * nodes_.size() + n];
}

double Network::total_demand(std::size_t period) const {
  if (period < 1 || period > period_count())
    throw ContractViolation("period " + std::to_string(period) + " outside 1.." +
                            std::to_string(period_count()));
  return total_demand_[period - 1];
}

void check_solution(const Solution& s, const Network& net, const PipeTypeCatalog& cat) {
  if (s.size() != net.pipe_count())
    throw ContractViolation("solution assigns " + std::to_string(s.size()) + " pipes, network has " +
                            std::to_string(net.pipe_count()));
  for (PipeIndex p = 0; p < s.size(); ++p)
    if (s[p] < 1 || s[p] > cat.size())
      throw ContractViolation("pipe '" + net.pipe(p).id + "' has invalid type " + std::to_string(s[p]));
}

double pipe_cost(const Solution& s, PipeIndex p, const Network& net, const PipeTypeCatalog& cat) {
  return cat.at(s.at(p)).unit_cost * net.pipe(p).length_m;
}

double solution_cost(const Solution& s, const Network& net, const PipeTypeCatalog& cat) {
  check_solution(s, net, cat);
  double total = 0.0;
  for (PipeIndex p = 0; p < net.pipe_count(); ++p) total += pipe_cost(s, p, net, cat);
  return total;
}

double meshedness(const Network& net) {
  const double denominator = 2.0 * static_cast<double>(net.node_count()) - 5.0;
  if (denominator <= 0.0)
    throw DomainError("meshedness needs at least 3 nodes (2|N| - 5 > 0)");
  return static_cast<double>(cycle_space_dim(net)) / denominator;
}

}  // namespace wdnd
