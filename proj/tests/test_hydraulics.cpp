#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "wdnd/errors.hpp"
#include "wdnd/graphkit.hpp"
#include "wdnd/hydraulics.hpp"

using namespace wdnd;
using fixtures::Builder;

namespace {
const PipeType k300{11, 300, 130, 201};
}

TEST_CASE("headloss") {
  CHECK(headloss(0.0, 1000, k300) == 0.0);
  // 30-digit mpmath evaluation of the closed form
  CHECK(headloss(0.1, 1000, k300) == doctest::Approx(6.43076667905346).epsilon(1e-12));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> flow(1e-5, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double q = flow(rng);
    CHECK(headloss(-q, 750, k300) == -headloss(q, 750, k300));
    CHECK(headloss(q, 750, k300) > 0.0);
  }
}

TEST_CASE("headloss_gradient") {
  const double floor = SolverConfig{}.gradient_floor;
  CHECK(headloss_gradient(0.0, 1000, k300, floor) == floor);

  const double q = 0.05;
  const double h = 1e-6;
  const double central = (headloss(q + h, 1000, k300) - headloss(q - h, 1000, k300)) / (2 * h);
  CHECK(headloss_gradient(q, 1000, k300) == doctest::Approx(central).epsilon(1e-4));

  for (double x : {1e-4, 0.01, 0.3, 1.5}) {
    CHECK(headloss_gradient(x, 400, k300) == headloss_gradient(-x, 400, k300));
    CHECK(headloss_gradient(x, 400, k300) > 0.0);
  }
}

TEST_CASE("velocity") {
  CHECK(velocity(0.0, k300) == 0.0);
  CHECK(velocity(0.1, k300) == doctest::Approx(1.4111111111).epsilon(1e-9));
  CHECK(velocity(0.2, k300) == doctest::Approx(2 * velocity(0.1, k300)).epsilon(1e-15));
  CHECK(velocity(-0.1, k300) == velocity(0.1, k300));
}

TEST_CASE("simulate_period on tiny networks") {
  const PipeTypeCatalog t3 = fixtures::table3();

  SUBCASE("no demand: no flow, reservoir head everywhere") {
    Builder b;
    auto r = b.reservoir("R", 50);
    b.pipe("P", r, b.junction("J", 0), 1000);
    const Network net = b.build();
    const PeriodState st = simulate_period(net, t3, Solution(1, 11), 1);
    CHECK(st.converged);
    CHECK(std::abs(st.flow[0]) < 1e-9);
    CHECK(st.head[1] == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(st.head[0] == 50.0);
  }

  SUBCASE("single pipe carries the whole demand") {
    Builder b;
    auto r = b.reservoir("R", 50);
    b.pipe("P", r, b.junction("J", 0, 0.002), 1000);
    const Network net = b.build();
    const PeriodState st = simulate_period(net, t3, Solution(1, 11), 1);
    REQUIRE(st.converged);
    CHECK(st.flow[0] == doctest::Approx(0.002).epsilon(1e-10));
    const double oracle = 50.0 - static_cast<double>(fixtures::closed_form_headloss(0.002L, 1000, 300, 130));
    CHECK(std::abs(st.head[1] - oracle) < 1e-6);
    CHECK(st.velocity[0] == doctest::Approx(1.27 * 0.002 / 0.09).epsilon(1e-8));
  }

  SUBCASE("two identical parallel pipes split the flow") {
    Builder b;
    auto r = b.reservoir("R", 50);
    auto j = b.junction("J", 0, 0.01);
    b.pipe("A", r, j, 800);
    b.pipe("B", j, r, 800);  // opposite reference orientation
    const Network net = b.build();
    const PeriodState st = simulate_period(net, t3, Solution(2, 9), 1);
    REQUIRE(st.converged);
    CHECK(st.flow[0] == doctest::Approx(0.005).epsilon(1e-8));
    CHECK(st.flow[1] == doctest::Approx(-0.005).epsilon(1e-8));
  }

  SUBCASE("reservoir heads are fixed exactly") {
    const Network net = fixtures::ring_network(60, 5, 0.003);
    const PeriodState st = simulate_period(net, t3, Solution(net.pipe_count(), 9), 8);
    CHECK(st.head[0] == 60.0);
  }

  SUBCASE("wrong period is a contract violation") {
    const Network net = fixtures::ring_network(60, 3, 0.003);
    CHECK_THROWS_AS(simulate_period(net, t3, Solution(net.pipe_count(), 9), 0), ContractViolation);
    CHECK_THROWS_AS(simulate_period(net, t3, Solution(net.pipe_count(), 9), 25), ContractViolation);
  }
}

TEST_CASE("conservation on a meshed network") {
  const PipeTypeCatalog t3 = fixtures::table3();
  const Network net = fixtures::ring_network(80, 6, 0.004);
  const auto cycles = fundamental_cycles(net);
  REQUIRE(cycles.size() == 1);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<TypeIndex> types(net.pipe_count());
    for (auto& t : types) t = std::uniform_int_distribution<int>(6, 14)(rng);
    const Solution s(types);
    for (std::size_t tau = 1; tau <= net.period_count(); ++tau) {
      const PeriodState st = simulate_period(net, t3, s, tau);
      REQUIRE(st.converged);
      CHECK(max_mass_imbalance(net, st) <= 1e-6 * std::max(1.0, net.total_demand(tau)));
      CHECK(std::abs(loop_headloss_residual(net, t3, s, st, cycles[0])) <= 1e-5);
      for (PipeIndex p = 0; p < net.pipe_count(); ++p) {
        const Pipe& pipe = net.pipe(p);
        const double loss = headloss(st.flow[p], pipe.length_m, t3.at(s[p]));
        CHECK(std::abs(st.head[pipe.from] - st.head[pipe.to] - loss) <= 1e-6);
      }
    }
  }
}

TEST_CASE("reversing a pipe's orientation negates its flow only") {
  const PipeTypeCatalog t3 = fixtures::table3();
  auto build = [](bool reversed) {
    Builder b;
    b.pattern("daily", fixtures::daily_pattern());
    auto r = b.reservoir("R", 70);
    auto a = b.junction("A", 5, 0.004, "daily");
    auto c = b.junction("C", 3, 0.006, "daily");
    auto d = b.junction("D", 8, 0.002, "daily");
    b.pipe("1", r, a, 600);
    reversed ? b.pipe("2", c, a, 500) : b.pipe("2", a, c, 500);
    b.pipe("3", a, d, 700);
    b.pipe("4", d, c, 400);
    return b.build();
  };
  const Network fwd = build(false);
  const Network rev = build(true);
  const Solution s(std::vector<TypeIndex>{11, 9, 8, 8});
  const PeriodState x = simulate_period(fwd, t3, s, 8);
  const PeriodState y = simulate_period(rev, t3, s, 8);
  CHECK(y.flow[1] == doctest::Approx(-x.flow[1]).epsilon(1e-9));
  for (NodeIndex n = 0; n < fwd.node_count(); ++n) CHECK(y.head[n] == doctest::Approx(x.head[n]).epsilon(1e-9));
}

TEST_CASE("larger diameters never lower pressure on a path") {
  const PipeTypeCatalog t3 = fixtures::table3();
  const Network net = fixtures::path_network(90, {400, 300, 500, 200}, {0.003, 0.002, 0.004, 0.001});
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<TypeIndex> types(net.pipe_count());
    for (auto& t : types) t = std::uniform_int_distribution<int>(5, 15)(rng);
    Solution s(types);
    const PipeIndex p = rng() % net.pipe_count();
    Solution bigger = s;
    bigger[p] += 1;
    const PeriodState a = simulate_period(net, t3, s, 8);
    const PeriodState b = simulate_period(net, t3, bigger, 8);
    for (NodeIndex n : net.junctions()) CHECK(b.head[n] >= a.head[n] - 1e-7);
  }
}

TEST_CASE("determinism") {
  const PipeTypeCatalog t3 = fixtures::table3();
  const Network net = fixtures::ring_network(80, 7, 0.003);
  const Solution s(net.pipe_count(), 9);
  const PeriodState a = simulate_period(net, t3, s, 5);
  const PeriodState b = simulate_period(net, t3, s, 5);
  CHECK(a.head == b.head);
  CHECK(a.flow == b.flow);
  CHECK(a.iterations_used == b.iterations_used);
}

TEST_CASE("loop_headloss_residual") {
  const PipeTypeCatalog t3 = fixtures::table3();
  const Network net = fixtures::ring_network(80, 4, 0.003);
  const Solution s(net.pipe_count(), 9);
  PeriodState st = simulate_period(net, t3, s, 8);
  const Cycle ring = fundamental_cycles(net).at(0);

  SUBCASE("converged state closes the loop") {
    CHECK(std::abs(loop_headloss_residual(net, t3, s, st, ring)) <= 1e-5);
  }
  SUBCASE("made-up flows do not") {
    for (double& q : st.flow) q = 0.01;
    CHECK(std::abs(loop_headloss_residual(net, t3, s, st, ring)) > 1e-3);
  }
  SUBCASE("open walk is rejected") {
    Cycle open(ring.begin(), ring.end() - 1);
    CHECK_THROWS_AS(loop_headloss_residual(net, t3, s, st, open), ContractViolation);
  }
  SUBCASE("tree has no cycles") {
    CHECK(fundamental_cycles(fixtures::path_network(50, {10, 10}, {0.001, 0.001})).empty());
  }
}

TEST_CASE("validate") {
  const PipeTypeCatalog t3 = fixtures::table3();

  SUBCASE("zero demand network is feasible for any assignment") {
    Builder b;
    auto r = b.reservoir("R", 50);
    auto a = b.junction("A", 10);
    auto c = b.junction("C", 20);
    b.pipe("1", r, a, 100);
    b.pipe("2", a, c, 100);
    const Network net = b.build();
    for (TypeIndex t = 1; t <= t3.size(); ++t) CHECK(validate(net, t3, Solution(2, t), {}, {}).feasible);
  }

  SUBCASE("pressure just below the bound at peak demand") {
    // Peak multiplier 1.0 occurs first at period 8.
    const double peak = 0.02;
    const double loss = static_cast<double>(fixtures::closed_form_headloss(peak, 1000, 150, 130));
    const double head = 20.0 + loss - 1e-3;  // pressure head h_min - 0.001 at the peak
    const Network net = fixtures::path_network(head, {1000}, {peak});
    std::atomic<std::uint64_t> calls{0};
    const Verdict v = validate(net, t3, Solution(1, 8), {}, {20.0, 2.0}, &calls);
    REQUIRE_FALSE(v.feasible);
    CHECK(v.violation->kind == ViolationKind::pressure);
    CHECK(v.violation->period == 8);
    CHECK(v.violation->element == 1);
    CHECK(v.violation->value == doctest::Approx(20.0 - 1e-3).epsilon(1e-6));
    CHECK(calls == 8);  // short-circuits at the first violating period

    const Network relaxed = fixtures::path_network(head + 2e-3, {1000}, {peak});
    CHECK(validate(relaxed, t3, Solution(1, 8), {}, {20.0, 2.0}).feasible);
  }

  SUBCASE("velocity violation reported in the first period") {
    // 20 mm pipe, q = 0.001 at multiplier 0.4: v = 1.27 * 0.0004 / 0.0004 = 1.27 ... use 0.002 base
    const Network net = fixtures::path_network(10000, {10}, {0.002});
    std::atomic<std::uint64_t> calls{0};
    const Verdict v = validate(net, t3, Solution(1, 1), {}, {20.0, 2.0}, &calls);
    REQUIRE_FALSE(v.feasible);
    CHECK(v.violation->kind == ViolationKind::velocity);
    CHECK(v.violation->period == 1);
    CHECK(v.violation->value == doctest::Approx(1.27 * 0.0008 / 0.0004).epsilon(1e-6));
    CHECK(calls == 1);
  }

  SUBCASE("validator counts simulator calls") {
    const Network net = fixtures::ring_network(80, 4, 0.002);
    const Validator validator(net, t3);
    CHECK(validator(Solution(net.pipe_count(), 16)).feasible);
    CHECK(validator.simulator_calls() == 24);
  }

  SUBCASE("non-convergence is an infeasible verdict") {
    const Network net = fixtures::ring_network(80, 4, 0.002);
    SolverConfig tight;
    tight.max_iterations = 1;
    const Verdict v = validate(net, t3, Solution(net.pipe_count(), 9), tight, {});
    REQUIRE_FALSE(v.feasible);
    CHECK(v.violation->kind == ViolationKind::non_convergence);
  }
}
