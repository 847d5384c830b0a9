#include "wdnd/hydraulics.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <numbers>

#include "wdnd/errors.hpp"

namespace wdnd {

namespace {

// Total flow (m^3/s) below which a network counts as idle; stops the relative
// criterion from chasing round-off when there is no demand.
constexpr double kNegligibleFlow = 1e-9;

// Resistance K in headloss = K |q|^0.852 q.
double resistance(double length_m, const PipeType& t) {
  return hw::kConversion * length_m /
         (std::pow(t.roughness, hw::kFlowExponent) * std::pow(t.diameter_m(), hw::kDiameterExponent));
}

}  // namespace

void SolverConfig::check() const {
  if (!(flow_tolerance > 0.0) || max_iterations <= 0 || !(init_velocity > 0.0) ||
      !(gradient_floor > 0.0) || polish_iterations < 0)
    throw ContractViolation("solver configuration values must be strictly positive");
}

double headloss(double q, double length_m, const PipeType& t) {
  if (q == 0.0) return 0.0;
  const double magnitude = resistance(length_m, t) * std::pow(std::abs(q), hw::kFlowExponent);
  return q > 0.0 ? magnitude : -magnitude;
}

double headloss_gradient(double q, double length_m, const PipeType& t, double gradient_floor) {
  const double g = hw::kFlowExponent * resistance(length_m, t) *
                   std::pow(std::abs(q), hw::kFlowExponent - 1.0);
  return std::max(g, gradient_floor);
}

double velocity(double q, const PipeType& t) {
  const double d = t.diameter_m();
  return hw::kVelocityFactor * std::abs(q) / (d * d);
}

PeriodState simulate_period(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                            std::size_t period, const SolverConfig& cfg) {
  cfg.check();
  check_solution(s, net, cat);
  if (period < 1 || period > net.period_count())
    throw ContractViolation("period " + std::to_string(period) + " outside the horizon");

  const std::size_t node_count = net.node_count();
  const std::size_t pipe_count = net.pipe_count();
  constexpr long kFixed = -1;

  std::vector<long> unknown(node_count, kFixed);
  long junction_count = 0;
  for (NodeIndex n : net.junctions()) unknown[n] = junction_count++;

  PeriodState state;
  state.period = period;
  state.head.assign(node_count, 0.0);
  for (NodeIndex r : net.reservoirs()) state.head[r] = *net.node(r).fixed_head;

  std::vector<double> k(pipe_count);
  std::vector<double> q(pipe_count);
  for (PipeIndex p = 0; p < pipe_count; ++p) {
    const PipeType& t = cat.at(s[p]);
    k[p] = resistance(net.pipe(p).length_m, t);
    const double d = t.diameter_m();
    q[p] = cfg.init_velocity * std::numbers::pi * d * d / 4.0;
  }

  std::vector<double> conductance(pipe_count);  // 1 / gradient
  std::vector<double> excess(pipe_count);       // q - headloss / gradient
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * pipe_count);
  Eigen::VectorXd rhs(junction_count);
  Eigen::VectorXd heads(junction_count);
  Eigen::SparseMatrix<double> system(junction_count, junction_count);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  bool analyzed = false;
  int polish_left = cfg.polish_iterations;

  for (int iteration = 1; iteration <= cfg.max_iterations + cfg.polish_iterations; ++iteration) {
    triplets.clear();
    rhs.setZero();
    for (NodeIndex n : net.junctions()) rhs[unknown[n]] = -net.demand(n, period);

    for (PipeIndex p = 0; p < pipe_count; ++p) {
      const double magnitude = k[p] * std::pow(std::abs(q[p]), hw::kFlowExponent - 1.0);
      const double gradient = std::max(hw::kFlowExponent * magnitude, cfg.gradient_floor);
      conductance[p] = 1.0 / gradient;
      excess[p] = q[p] - magnitude * q[p] / gradient;

      const Pipe& pipe = net.pipe(p);
      const long a = unknown[pipe.from];
      const long b = unknown[pipe.to];
      const double c = conductance[p];
      if (a != kFixed) {
        triplets.emplace_back(a, a, c);
        rhs[a] -= excess[p];
      }
      if (b != kFixed) {
        triplets.emplace_back(b, b, c);
        rhs[b] += excess[p];
      }
      if (a != kFixed && b != kFixed) {
        triplets.emplace_back(a, b, -c);
        triplets.emplace_back(b, a, -c);
      } else if (a == kFixed && b != kFixed) {
        rhs[b] += c * state.head[pipe.from];
      } else if (b == kFixed && a != kFixed) {
        rhs[a] += c * state.head[pipe.to];
      }
    }

    if (junction_count > 0) {
      system.setFromTriplets(triplets.begin(), triplets.end());
      if (!analyzed) {
        solver.analyzePattern(system);
        analyzed = true;
      }
      solver.factorize(system);
      if (solver.info() != Eigen::Success)
        throw InstanceError("singular junction system; some junction is cut off from all reservoirs");
      heads = solver.solve(rhs);
      for (NodeIndex n : net.junctions()) state.head[n] = heads[unknown[n]];
    }

    double change = 0.0;
    double total = 0.0;
    for (PipeIndex p = 0; p < pipe_count; ++p) {
      const Pipe& pipe = net.pipe(p);
      const double updated =
          excess[p] + conductance[p] * (state.head[pipe.from] - state.head[pipe.to]);
      change += std::abs(updated - q[p]);
      total += std::abs(updated);
      q[p] = updated;
    }
    state.iterations_used = iteration;
    if (state.converged) {
      if (--polish_left <= 0 || change == 0.0) break;
    } else if (change < cfg.flow_tolerance * std::max(total, kNegligibleFlow)) {
      state.converged = true;
      if (polish_left == 0 || change == 0.0) break;
    } else if (iteration == cfg.max_iterations) {
      break;
    }
  }

  state.flow = std::move(q);
  state.velocity.resize(pipe_count);
  for (PipeIndex p = 0; p < pipe_count; ++p) state.velocity[p] = velocity(state.flow[p], cat.at(s[p]));
  return state;
}

HydraulicState simulate(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                        const SolverConfig& cfg) {
  HydraulicState out;
  out.per_period.reserve(net.period_count());
  for (std::size_t tau = 1; tau <= net.period_count(); ++tau)
    out.per_period.push_back(simulate_period(net, cat, s, tau, cfg));
  return out;
}

double max_mass_imbalance(const Network& net, const PeriodState& state) {
  std::vector<double> net_inflow(net.node_count(), 0.0);
  for (PipeIndex p = 0; p < net.pipe_count(); ++p) {
    net_inflow[net.pipe(p).to] += state.flow[p];
    net_inflow[net.pipe(p).from] -= state.flow[p];
  }
  double worst = 0.0;
  for (NodeIndex n : net.junctions())
    worst = std::max(worst, std::abs(net_inflow[n] - net.demand(n, state.period)));
  return worst;
}

double loop_headloss_residual(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                              const PeriodState& state, const Cycle& cycle) {
  if (cycle.empty()) throw ContractViolation("empty cycle");
  auto tail = [&](const OrientedPipe& op) {
    const Pipe& pipe = net.pipe(op.pipe);
    return op.direction > 0 ? pipe.from : pipe.to;
  };
  auto head = [&](const OrientedPipe& op) {
    const Pipe& pipe = net.pipe(op.pipe);
    return op.direction > 0 ? pipe.to : pipe.from;
  };
  double residual = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const OrientedPipe& op = cycle[i];
    if (op.direction != 1 && op.direction != -1) throw ContractViolation("orientation must be +1 or -1");
    const OrientedPipe& next = cycle[(i + 1) % cycle.size()];
    if (head(op) != tail(next)) throw ContractViolation("cycle is not a closed walk");
    const double loss = headloss(state.flow.at(op.pipe), net.pipe(op.pipe).length_m, cat.at(s.at(op.pipe)));
    residual += op.direction * loss;
  }
  return residual;
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::non_convergence: return "non_convergence";
    case ViolationKind::pressure: return "pressure";
    case ViolationKind::velocity: return "velocity";
  }
  return "unknown";
}

Verdict validate(const Network& net, const PipeTypeCatalog& cat, const Solution& s,
                 const SolverConfig& cfg, const HydraulicLimits& limits,
                 std::atomic<std::uint64_t>* simulator_calls) {
  for (std::size_t tau = 1; tau <= net.period_count(); ++tau) {
    const PeriodState state = simulate_period(net, cat, s, tau, cfg);
    if (simulator_calls) simulator_calls->fetch_add(1, std::memory_order_relaxed);
    if (!state.converged)
      return {false, Violation{tau, ViolationKind::non_convergence, 0, 0.0}};
    for (NodeIndex n : net.junctions()) {
      const double pressure = state.head[n] - net.node(n).elevation;
      if (pressure < limits.min_pressure)
        return {false, Violation{tau, ViolationKind::pressure, n, pressure}};
    }
    for (PipeIndex p = 0; p < net.pipe_count(); ++p)
      if (state.velocity[p] > limits.max_velocity)
        return {false, Violation{tau, ViolationKind::velocity, p, state.velocity[p]}};
  }
  return {true, std::nullopt};
}

Validator::Validator(const Network& net, const PipeTypeCatalog& cat, HydraulicLimits limits,
                     SolverConfig cfg)
    : net_(net), cat_(cat), limits_(limits), cfg_(cfg) {
  cfg_.check();
}

Verdict Validator::operator()(const Solution& s) const {
  return validate(net_, cat_, s, cfg_, limits_, &calls_);
}

}  // namespace wdnd
