#pragma once

// In-code network fixtures shared by the unit and acceptance suites.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "wdnd/hydraulics.hpp"
#include "wdnd/network.hpp"

namespace fixtures {

using namespace wdnd;

/// Pipe types as published for the HG-MP benchmark (16 rows, two identical 400 mm rows).
inline PipeTypeCatalog table3() {
  const double rows[16][3] = {{20, 130, 9},    {30, 130, 20},   {40, 130, 25},   {50, 130, 30},
                              {60, 130, 35},   {80, 130, 48},   {100, 130, 50},  {150, 130, 61},
                              {200, 130, 116}, {250, 130, 150}, {300, 130, 201}, {400, 130, 290},
                              {400, 130, 290}, {500, 130, 351}, {600, 130, 528}, {1000, 130, 628}};
  std::vector<PipeType> types;
  for (int i = 0; i < 16; ++i) types.push_back({i + 1, rows[i][0], rows[i][1], rows[i][2]});
  return PipeTypeCatalog(std::move(types));
}

/// Catalog from (diameter_mm, unit_cost) pairs, roughness 130.
inline PipeTypeCatalog catalog_of(std::initializer_list<std::pair<double, double>> rows) {
  std::vector<PipeType> types;
  int i = 0;
  for (auto [d, c] : rows) types.push_back({++i, d, 130.0, c});
  return PipeTypeCatalog(std::move(types));
}

/// 24 hourly multipliers with a morning and an evening peak (max 1.0, min 0.4).
inline std::vector<double> daily_pattern() {
  return {0.4, 0.4, 0.45, 0.5, 0.6, 0.75, 0.9, 1.0, 0.95, 0.85, 0.8, 0.8,
          0.8, 0.75, 0.7, 0.7, 0.75, 0.85, 0.95, 1.0, 0.9, 0.7, 0.55, 0.45};
}

class Builder {
 public:
  NodeIndex reservoir(const std::string& id, double head) {
    Node n;
    n.id = id;
    n.kind = NodeKind::reservoir;
    n.elevation = head;
    n.fixed_head = head;
    nodes_.push_back(n);
    return nodes_.size() - 1;
  }

  NodeIndex junction(const std::string& id, double elevation, double base = 0.0,
                     const std::string& pattern = "") {
    Node n;
    n.id = id;
    n.elevation = elevation;
    if (base > 0.0 || !pattern.empty()) n.demands.push_back({base, pattern});
    nodes_.push_back(n);
    return nodes_.size() - 1;
  }

  void add_demand(NodeIndex n, double base, const std::string& pattern) {
    nodes_[n].demands.push_back({base, pattern});
  }

  PipeIndex pipe(const std::string& id, NodeIndex a, NodeIndex b, double length) {
    pipes_.push_back({id, a, b, length});
    return pipes_.size() - 1;
  }

  void pattern(const std::string& id, std::vector<double> values) { patterns_[id] = std::move(values); }
  void periods(std::size_t n) { periods_ = n; }

  Network build() const {
    std::size_t periods = periods_;
    if (periods == 0) {
      for (const auto& [id, v] : patterns_) periods = std::max(periods, v.size());
      if (periods == 0) periods = kDefaultPeriodCount;
    }
    return Network(nodes_, pipes_, DemandModel(patterns_, periods));
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Pipe> pipes_;
  std::map<std::string, std::vector<double>> patterns_;
  std::size_t periods_ = 0;
};

/// R (head) - j1 - j2 - ... along pipes of the given lengths; junction i has
/// demand demands[i] (m^3/s) under the daily pattern.
inline Network path_network(double head, const std::vector<double>& lengths, const std::vector<double>& demands,
                            double elevation = 0.0) {
  Builder b;
  b.pattern("daily", daily_pattern());
  NodeIndex prev = b.reservoir("R", head);
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    NodeIndex j = b.junction("J" + std::to_string(i + 1), elevation, demands[i], "daily");
    b.pipe("P" + std::to_string(i + 1), prev, j, lengths[i]);
    prev = j;
  }
  return b.build();
}

/// Reservoir feeding a loop of `n` junctions (pipes R-J1 and the ring J1..Jn).
inline Network ring_network(double head, int n, double demand, double length = 500.0) {
  Builder b;
  b.pattern("daily", daily_pattern());
  NodeIndex r = b.reservoir("R", head);
  std::vector<NodeIndex> js;
  for (int i = 0; i < n; ++i) js.push_back(b.junction("J" + std::to_string(i + 1), 0.0, demand, "daily"));
  b.pipe("P0", r, js[0], length);
  for (int i = 0; i < n; ++i)
    b.pipe("P" + std::to_string(i + 1), js[i], js[(i + 1) % n], length * (1.0 + 0.1 * i));
  return b.build();
}

/// Independent long-double evaluation of the Hazen-Williams closed form.
inline long double closed_form_headloss(long double q, long double length, long double diameter_mm,
                                        long double roughness) {
  const long double d = diameter_mm / 1000.0L;
  const long double magnitude = 10.6744L * std::exp(1.852L * std::log(std::fabs(q))) * length /
                                (std::exp(1.852L * std::log(roughness)) * std::exp(4.871L * std::log(d)));
  return q < 0 ? -magnitude : magnitude;
}

}  // namespace fixtures
