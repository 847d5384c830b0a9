#pragma once

// Steady-state hydraulics of gravity-fed networks: Hazen-Williams head loss,
// a nodal Newton (global gradient) solver per demand period, and the
// feasibility validator that runs it over the whole horizon.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wdnd/network.hpp"

namespace wdnd {

namespace hw {
inline constexpr double kConversion = 10.6744;
inline constexpr double kFlowExponent = 1.852;
inline constexpr double kDiameterExponent = 4.871;
inline constexpr double kVelocityFactor = 1.27;  // ~ 4/pi
}  // namespace hw

struct SolverConfig {
  double flow_tolerance = 0.001;  // sum|dq| / sum|q|
  int max_iterations = 200;
  double init_velocity = 0.3048;  // m/s, seeds the initial flows
  double gradient_floor = 1e-7;   // m per m^3/s
  // Extra Newton steps once the tolerance is met; tightens loop energy
  // balance from ~1e-5 m to round-off at the cost of two solves.
  int polish_iterations = 2;

  void check() const;
};

/// Signed head loss (m) along the reference orientation for flow q (m^3/s).
double headloss(double q, double length_m, const PipeType& t);

/// d(headloss)/dq, never below `gradient_floor`.
double headloss_gradient(double q, double length_m, const PipeType& t,
                         double gradient_floor = SolverConfig{}.gradient_floor);

/// Mean velocity (m/s) for flow q through a pipe of type t.
double velocity(double q, const PipeType& t);

struct PeriodState {
  std::size_t period = 0;      // 1-based
  std::vector<double> head;    // per node, m
  std::vector<double> flow;    // per pipe, signed m^3/s along from -> to
  std::vector<double> velocity;  // per pipe, m/s
  bool converged = false;
  int iterations_used = 0;
};

struct HydraulicState {
  std::vector<PeriodState> per_period;
};

/// Solves heads and flows for one 1-based period. Non-convergence is reported
/// through `converged`; a singular junction system raises InstanceError.
PeriodState simulate_period(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                            std::size_t period, const SolverConfig& cfg = {});

/// Runs every period of the horizon without feasibility checks.
HydraulicState simulate(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                        const SolverConfig& cfg = {});

/// Largest |inflow - outflow - demand| over junctions.
double max_mass_imbalance(const Network& net, const PeriodState& state);

/// Oriented sum of head losses around `cycle`; throws ContractViolation if
/// the walk is not closed.
double loop_headloss_residual(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                              const PeriodState& state, const Cycle& cycle);

enum class ViolationKind { non_convergence, pressure, velocity };

std::string to_string(ViolationKind kind);

struct Violation {
  std::size_t period = 0;
  ViolationKind kind = ViolationKind::pressure;
  std::size_t element = 0;  // node index for pressure, pipe index for velocity
  double value = 0.0;       // offending pressure head or velocity
};

struct Verdict {
  bool feasible = true;
  std::optional<Violation> violation;

  explicit operator bool() const { return feasible; }
};

struct HydraulicLimits {
  double min_pressure = 20.0;  // m of pressure head at junctions
  double max_velocity = 2.0;   // m/s
};

/// Checks every period in order and stops at the first violation.
/// `simulator_calls`, when given, is bumped once per simulated period.
Verdict validate(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                 const SolverConfig& cfg, const HydraulicLimits& limits,
                 std::atomic<std::uint64_t>* simulator_calls = nullptr);

/// Validator bound to one instance with its own simulator-call counter.
class Validator {
 public:
  Validator(const Network& net, const PipeTypeCatalog& cat, HydraulicLimits limits = {},
            SolverConfig cfg = {});

  Verdict operator()(const Solution& s) const;
  std::uint64_t simulator_calls() const { return calls_.load(std::memory_order_relaxed); }

  const Network& network() const { return net_; }
  const PipeTypeCatalog& catalog() const { return cat_; }
  const HydraulicLimits& limits() const { return limits_; }

 private:
  const Network& net_;
  const PipeTypeCatalog& cat_;
  HydraulicLimits limits_;
  SolverConfig cfg_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

}  // namespace wdnd
