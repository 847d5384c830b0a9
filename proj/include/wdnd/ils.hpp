#pragma once

// Simulation-based iterated local search for pipe sizing: uniform initial
// solution, SPT-aware greedy-randomized local search with an aggressive
// reduction factor, dispersed and concentrated perturbations, and a
// pool-based acceptance criterion.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wdnd/graphkit.hpp"
#include "wdnd/hydraulics.hpp"
#include "wdnd/network.hpp"

namespace wdnd {

/// The search engine only needs a yes/no feasibility answer; hydraulic
/// validation is one implementation.
using FeasibilityCheck = std::function<bool(const Solution&)>;

/// Which enhancements are switched on. `full` is the complete method, `base`
/// approximates the earlier ILS, the others add a single enhancement to `base`.
enum class Variant { full, base, redu_only, pool_only, pert_only, spt_only };

std::string to_string(Variant v);
Variant parse_variant(std::string_view name);

struct SearchParams {
  double alpha = 0.05;   // greediness; also perturbation strength
  int factor = 4;        // initial type reduction factor
  int pool_size = 3;     // nu
  double time_limit_s = 60.0;
  std::uint64_t seed = 1;
  Variant variant = Variant::full;
  /// Probability of the dispersed perturbation; defaults to 1 - alpha.
  std::optional<double> dispersed_probability;
  /// Optional deterministic budget on top of the wall clock.
  std::optional<std::uint64_t> max_iterations;
  /// Stop as soon as the best cost is at or below this value.
  std::optional<double> target_cost;

  void check() const;
};

/// Component switches derived from SearchParams::variant.
struct Features {
  bool shortest_path_protection = true;
  bool aggressive_reduction = true;
  bool solution_pool = true;
  bool concentrated_perturbation = true;
};

Features features_of(Variant v);

struct CostedSolution {
  Solution solution;
  double cost = 0.0;
};

/// Fixed-size memory of solutions. Replacing "the worst" picks the highest
/// cost slot, the oldest one among ties.
class Pool {
 public:
  Pool(std::size_t size, const CostedSolution& seed);

  std::size_t size() const { return slots_.size(); }
  const CostedSolution& operator[](std::size_t i) const { return slots_.at(i).entry; }
  std::size_t worst_index() const;
  void replace_worst(CostedSolution s);

 private:
  struct Slot {
    CostedSolution entry;
    std::uint64_t stamp = 0;
  };
  std::vector<Slot> slots_;
  std::uint64_t clock_ = 0;
};

struct TracePoint {
  double elapsed_s = 0.0;
  double cost = 0.0;
};

struct SearchStats {
  std::uint64_t iterations = 0;
  std::uint64_t simulator_calls = 0;
  std::uint64_t tested_solutions = 0;
  std::uint64_t feasible_tested = 0;
  std::vector<TracePoint> best_cost_trace;

  double feasible_fraction() const {
    return tested_solutions == 0 ? 0.0
                                 : static_cast<double>(feasible_tested) / static_cast<double>(tested_solutions);
  }
  double time_to_best_s() const { return best_cost_trace.empty() ? 0.0 : best_cost_trace.back().elapsed_s; }
};

using Rng = std::mt19937_64;

/// Mutable state shared by the search procedures of one run. Counts every
/// feasibility test it performs.
class SearchContext {
 public:
  SearchContext(const Network& net, const PipeTypeCatalog& cat, FeasibilityCheck check,
                std::uint64_t seed);

  const Network& network() const { return net_; }
  const PipeTypeCatalog& catalog() const { return cat_; }
  Rng& rng() { return rng_; }

  bool feasible(const Solution& s);
  double cost(const Solution& s) const { return solution_cost(s, net_, cat_); }

  std::uint64_t tested() const { return tested_; }
  std::uint64_t feasible_count() const { return feasible_; }

  /// Pipes whose reduction is postponed by the local search.
  std::span<const PipeIndex> protected_pipes() const { return protected_; }
  void set_protected_pipes(std::vector<PipeIndex> pipes);
  bool is_protected(PipeIndex p) const { return is_protected_[p]; }

 private:
  const Network& net_;
  const PipeTypeCatalog& cat_;
  FeasibilityCheck check_;
  Rng rng_;
  std::uint64_t tested_ = 0;
  std::uint64_t feasible_ = 0;
  std::vector<PipeIndex> protected_;
  std::vector<bool> is_protected_;
};

/// Largest-to-smallest sweep over uniform assignments. Returns the smallest
/// feasible uniform type before the first infeasible one; throws
/// InfeasibleInstance if even the largest type is infeasible.
Solution initial_solution(const Network& net, const PipeTypeCatalog& cat, const FeasibilityCheck& check);

/// Greedy randomized type reductions by `factor`, restricted candidate list
/// over pipe lengths, tabu memory for infeasible moves.
Solution local_search(SearchContext& ctx, Solution s, int factor, double alpha);

/// Raises a random batch of floor(alpha |E|) pipes by one type, halving the
/// batch until a feasible perturbation appears. Returns `s` if none does.
Solution dispersed_perturbation(SearchContext& ctx, const Solution& s, double alpha);

/// Picks min(m, |candidates|) pipes, favouring low BFS levels; uniform within a level.
/// `candidates` must be nonempty and is read in ascending pipe order per level.
std::vector<PipeIndex> selection_criterion(std::span<const PipeIndex> candidates, const LevelMap& levels,
                                           std::size_t m, Rng& rng);

/// Restricted candidate list over per-pipe cost (at least the five most
/// expensive pipes), used to seed the concentrated perturbation.
std::vector<PipeIndex> costly_pipe_candidates(const Network& net, const PipeTypeCatalog& cat,
                                              const Solution& s, double alpha);

/// Perturbation focused around a random expensive pipe, via BFS levels.
Solution concentrated_perturbation(SearchContext& ctx, const Solution& s, double alpha);

/// Pool-based acceptance. Updates `best` or the pool's worst slot when the
/// candidate improves on the current solution and returns the candidate;
/// otherwise returns a uniform pick from pool and best.
CostedSolution acceptance_criterion(CostedSolution& best, const CostedSolution& cand,
                                    const CostedSolution& cur, Pool* pool, Rng& rng);

struct IterationEvent {
  std::uint64_t iteration = 0;  // 1-based
  int factor = 0;               // factor used by this iteration's local search
  double candidate_cost = 0.0;  // after local search
  double current_cost = 0.0;    // after perturbation
  double best_cost = 0.0;
  double elapsed_s = 0.0;
};

using IterationHook = std::function<void(const IterationEvent&)>;

struct RunResult {
  CostedSolution best;
  SearchStats stats;
};

/// Full search loop under a wall-clock budget. `simulator_calls`, when given,
/// is read back into the stats.
RunResult run(const Network& net, const PipeTypeCatalog& cat, const FeasibilityCheck& check,
              const SearchParams& params, const IterationHook& hook = {},
              const std::function<std::uint64_t()>& simulator_calls = {});

/// Convenience overload driving a hydraulic Validator.
RunResult run(const Network& net, const PipeTypeCatalog& cat, const HydraulicLimits& limits,
              const SearchParams& params, const IterationHook& hook = {}, const SolverConfig& cfg = {});

/// Exhaustive enumeration of all |T|^|E| assignments; refuses when that count
/// exceeds `limit` and throws InfeasibleInstance when nothing is feasible.
CostedSolution brute_force_optimum(const Network& net, const PipeTypeCatalog& cat,
                                   const FeasibilityCheck& check, std::uint64_t limit = 1'000'000);

}  // namespace wdnd
