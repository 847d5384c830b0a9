#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "wdnd/errors.hpp"
#include "wdnd/network.hpp"

using namespace wdnd;
using fixtures::Builder;

TEST_CASE("solution_cost") {
  const PipeTypeCatalog t3 = fixtures::table3();

  SUBCASE("one 1000 m pipe of type 8 costs 61 per meter") {
    Builder b;
    auto r = b.reservoir("R", 50);
    auto j = b.junction("J", 0);
    b.pipe("P", r, j, 1000);
    const Network net = b.build();
    CHECK(solution_cost(Solution(1, 8), net, t3) == 61000.0);
  }

  SUBCASE("empty network costs nothing") {
    Builder b;
    b.reservoir("R", 50);
    const Network net = b.build();
    CHECK(solution_cost(Solution(0, 1), net, t3) == 0.0);
  }

  SUBCASE("two pipes at 9 and 20 per meter") {
    Builder b;
    auto r = b.reservoir("R", 50);
    auto j1 = b.junction("A", 0);
    auto j2 = b.junction("B", 0);
    b.pipe("P1", r, j1, 100);
    b.pipe("P2", j1, j2, 200);
    const Network net = b.build();
    // oracle: 100 * 9 + 200 * 20
    CHECK(solution_cost(Solution(std::vector<TypeIndex>{1, 2}), net, t3) == 4900.0);
  }

  SUBCASE("incomplete assignment is a contract violation") {
    Builder b;
    auto r = b.reservoir("R", 50);
    auto j = b.junction("J", 0);
    b.pipe("P", r, j, 10);
    const Network net = b.build();
    CHECK_THROWS_AS(solution_cost(Solution(0, 1), net, t3), ContractViolation);
    CHECK_THROWS_AS(solution_cost(Solution(1, 17), net, t3), ContractViolation);
  }
}

TEST_CASE("cost is monotone in every pipe's type index") {
  const PipeTypeCatalog t3 = fixtures::table3();
  const Network net = fixtures::ring_network(60, 5, 0.002);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> type(1, t3.size());
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TypeIndex> types(net.pipe_count());
    for (auto& t : types) t = type(rng);
    Solution s(types);
    const PipeIndex p = rng() % net.pipe_count();
    if (s[p] == t3.size()) continue;
    Solution bigger = s;
    bigger[p] = std::uniform_int_distribution<int>(s[p] + 1, t3.size())(rng);
    CHECK(solution_cost(bigger, net, t3) >= solution_cost(s, net, t3));
  }
}

TEST_CASE("demand_at and base_demand") {
  DemandModel dm({{"two", {1.0, 0.5}}, {"three", {1.0, 0.2, 0.8}}}, 24);

  Node empty{"J", NodeKind::junction, 0.0, std::nullopt, {}};
  for (std::size_t tau = 1; tau <= 24; ++tau) CHECK(demand_at(empty, tau, dm) == 0.0);
  CHECK(base_demand(empty, dm) == 0.0);

  Node wrapped{"J", NodeKind::junction, 0.0, std::nullopt, {{0.002, "two"}}};
  CHECK(demand_at(wrapped, 2, dm) == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(demand_at(wrapped, 3, dm) == doctest::Approx(0.002).epsilon(1e-12));  // wraps

  Node reservoir{"R", NodeKind::reservoir, 10.0, 10.0, {}};
  CHECK(demand_at(reservoir, 5, dm) == 0.0);

  Node constant{"J", NodeKind::junction, 0.0, std::nullopt, {{0.003, ""}}};
  CHECK(base_demand(constant, dm) == 0.003);

  // min over enumerated periods of 0.01 * {1.0, 0.2, 0.8, ...}
  Node three{"J", NodeKind::junction, 0.0, std::nullopt, {{0.01, "three"}}};
  double oracle = 1e9;
  for (std::size_t tau = 1; tau <= 24; ++tau) oracle = std::min(oracle, 0.01 * std::vector{1.0, 0.2, 0.8}[(tau - 1) % 3]);
  CHECK(base_demand(three, dm) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(base_demand(three, dm) == doctest::Approx(0.002).epsilon(1e-12));

  Node multi{"J", NodeKind::junction, 0.0, std::nullopt, {{0.01, "three"}, {0.002, "two"}}};
  for (std::size_t tau = 1; tau <= 24; ++tau) {
    CHECK(demand_at(multi, tau, dm) >= 0.0);
    CHECK(base_demand(multi, dm) <= demand_at(multi, tau, dm));
  }

  Node unknown{"J", NodeKind::junction, 0.0, std::nullopt, {{0.01, "nope"}}};
  CHECK_THROWS_AS(demand_at(unknown, 1, dm), InstanceError);
  CHECK_THROWS_AS(demand_at(wrapped, 25, dm), ContractViolation);
}

TEST_CASE("meshedness") {
  SUBCASE("tree of 10 nodes") {
    Builder b;
    NodeIndex prev = b.reservoir("R", 10);
    for (int i = 0; i < 9; ++i) {
      NodeIndex j = b.junction("J" + std::to_string(i), 0);
      b.pipe("P" + std::to_string(i), prev, j, 10);
      prev = j;
    }
    CHECK(meshedness(b.build()) == 0.0);
  }
  SUBCASE("single 5-cycle") {
    const Network net = fixtures::ring_network(10, 4, 0.0);  // R + 4 ring nodes, 5 pipes
    REQUIRE(net.node_count() == 5);
    REQUIRE(net.pipe_count() == 5);
    CHECK(meshedness(net) == doctest::Approx(0.2));
  }
  SUBCASE("HG-MP-1 shape: 100 pipes, 74 nodes") {
    Builder b;
    std::vector<NodeIndex> ns{b.reservoir("R", 10)};
    for (int i = 1; i < 74; ++i) {
      ns.push_back(b.junction("J" + std::to_string(i), 0));
      b.pipe("T" + std::to_string(i), ns[i - 1], ns[i], 10);
    }
    for (int k = 0; k < 27; ++k) b.pipe("C" + std::to_string(k), ns[k], ns[k + 2], 10);
    const Network net = b.build();
    REQUIRE(net.pipe_count() == 100);
    CHECK(meshedness(net) == doctest::Approx(27.0 / 143.0));
    CHECK(std::abs(meshedness(net) - 0.20) < 0.015);
  }
  SUBCASE("too few nodes") {
    Builder b;
    auto r = b.reservoir("R", 10);
    b.pipe("P", r, b.junction("J", 0), 10);
    CHECK_THROWS_AS(meshedness(b.build()), DomainError);
  }
}

TEST_CASE("catalog invariants") {
  CHECK(fixtures::table3().size() == 16);
  // duplicate 400 mm rows are kept, not merged
  const PipeTypeCatalog t3 = fixtures::table3();
  CHECK(t3.at(12).diameter_mm == t3.at(13).diameter_mm);
  CHECK(t3.at(12).unit_cost == t3.at(13).unit_cost);
  CHECK_THROWS_AS(fixtures::catalog_of({{100, 10}, {50, 20}}), InstanceError);
  CHECK_THROWS_AS(fixtures::catalog_of({{50, 20}, {100, 10}}), InstanceError);
  CHECK_THROWS_AS(PipeTypeCatalog({}), InstanceError);
  CHECK_THROWS_AS(fixtures::catalog_of({{0, 10}}), InstanceError);
}

TEST_CASE("network invariants") {
  SUBCASE("needs a reservoir") {
    Builder b;
    b.junction("J", 0);
    CHECK_THROWS_AS(b.build(), InstanceError);
  }
  SUBCASE("must be connected") {
    Builder b;
    auto r = b.reservoir("R", 10);
    b.pipe("P", r, b.junction("A", 0), 5);
    b.junction("B", 0);
    CHECK_THROWS_WITH_AS(b.build(), doctest::Contains("'B'"), InstanceError);
  }
  SUBCASE("rejects nonpositive length, self loops and duplicates") {
    Builder b;
    auto r = b.reservoir("R", 10);
    auto j = b.junction("J", 0);
    b.pipe("P", r, j, 0);
    CHECK_THROWS_AS(b.build(), InstanceError);

    Builder c;
    auto r2 = c.reservoir("R", 10);
    c.pipe("P", r2, r2, 5);
    CHECK_THROWS_AS(c.build(), InstanceError);

    Builder d;
    auto r3 = d.reservoir("R", 10);
    auto j3 = d.junction("R", 0);
    d.pipe("P", r3, j3, 5);
    CHECK_THROWS_AS(d.build(), InstanceError);
  }
  SUBCASE("demand table matches demand_at") {
    const Network net = fixtures::path_network(50, {100, 200}, {0.002, 0.003});
    for (std::size_t tau = 1; tau <= net.period_count(); ++tau)
      for (NodeIndex n = 0; n < net.node_count(); ++n)
        CHECK(net.demand(n, tau) == demand_at(net.node(n), tau, net.demand_model()));
  }
}
