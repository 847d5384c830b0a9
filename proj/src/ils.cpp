#include "wdnd/ils.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <limits>

#include "wdnd/errors.hpp"

namespace wdnd {

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// floor(alpha |E|), robust to representation error in alpha.
std::size_t batch_size(double alpha, std::size_t pipe_count) {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(pipe_count) + 1e-9));
}

void erase_value(std::vector<PipeIndex>& v, PipeIndex p) {
  v.erase(std::find(v.begin(), v.end(), p));
}

// S with every pipe in `batch` raised one type, clamped at the largest type.
Solution raised(const Solution& s, std::span<const PipeIndex> batch, TypeIndex largest) {
  Solution out = s;
  for (PipeIndex p : batch) out[p] = std::min(out[p] + 1, largest);
  return out;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::base: return "base";
    case Variant::redu_only: return "redu-only";
    case Variant::pool_only: return "pool-only";
    case Variant::pert_only: return "pert-only";
    case Variant::spt_only: return "spt-only";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::full, Variant::base, Variant::redu_only, Variant::pool_only,
                    Variant::pert_only, Variant::spt_only})
    if (to_string(v) == name) return v;
  throw ContractViolation("unknown variant '" + std::string(name) + "'");
}

Features features_of(Variant v) {
  Features f{false, false, false, false};
  switch (v) {
    case Variant::full: return {true, true, true, true};
    case Variant::base: break;
    case Variant::redu_only: f.aggressive_reduction = true; break;
    case Variant::pool_only: f.solution_pool = true; break;
    case Variant::pert_only: f.concentrated_perturbation = true; break;
    case Variant::spt_only: f.shortest_path_protection = true; break;
  }
  return f;
}

void SearchParams::check() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractViolation("alpha must lie in [0, 1]");
  if (factor < 1) throw ContractViolation("reduction factor must be at least 1");
  if (pool_size < 1) throw ContractViolation("pool size must be at least 1");
  if (!(time_limit_s >= 0.0)) throw ContractViolation("time limit must be nonnegative");
  if (dispersed_probability && !(*dispersed_probability >= 0.0 && *dispersed_probability <= 1.0))
    throw ContractViolation("perturbation probability must lie in [0, 1]");
}

Pool::Pool(std::size_t size, const CostedSolution& seed) {
  if (size == 0) throw ContractViolation("pool size must be at least 1");
  for (std::size_t i = 0; i < size; ++i) slots_.push_back({seed, clock_++});
}

std::size_t Pool::worst_index() const {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < slots_.size(); ++i) {
    const Slot& a = slots_[i];
    const Slot& b = slots_[worst];
    if (a.entry.cost > b.entry.cost || (a.entry.cost == b.entry.cost && a.stamp < b.stamp)) worst = i;
  }
  return worst;
}

void Pool::replace_worst(CostedSolution s) {
  slots_[worst_index()] = {std::move(s), clock_++};
}

SearchContext::SearchContext(const Network& net, const PipeTypeCatalog& cat, FeasibilityCheck check,
                             std::uint64_t seed)
    : net_(net), cat_(cat), check_(std::move(check)), rng_(seed), is_protected_(net.pipe_count(), false) {
  if (!check_) throw ContractViolation("search needs a feasibility check");
}

bool SearchContext::feasible(const Solution& s) {
  ++tested_;
  const bool ok = check_(s);
  if (ok) ++feasible_;
  return ok;
}

void SearchContext::set_protected_pipes(std::vector<PipeIndex> pipes) {
  std::fill(is_protected_.begin(), is_protected_.end(), false);
  for (PipeIndex p : pipes) is_protected_.at(p) = true;
  protected_ = std::move(pipes);
}

Solution initial_solution(const Network& net, const PipeTypeCatalog& cat, const FeasibilityCheck& check) {
  std::optional<Solution> kept;
  for (TypeIndex t = cat.largest(); t >= 1; --t) {
    Solution candidate(net.pipe_count(), t);
    if (check(candidate)) {
      kept = std::move(candidate);
    } else if (t != cat.largest()) {
      return *kept;
    } else {
      throw InfeasibleInstance("no feasible solution exists using the same type for all pipes");
    }
  }
  return *kept;
}

Solution local_search(SearchContext& ctx, Solution s, int factor, double alpha) {
  const Network& net = ctx.network();
  std::vector<bool> tabu(net.pipe_count(), false);
  std::vector<PipeIndex> open;
  std::vector<PipeIndex> rcl;
  std::vector<PipeIndex> unprotected;

  bool improve = true;
  while (improve) {
    improve = false;
    open.clear();
    for (PipeIndex p = 0; p < net.pipe_count(); ++p)
      if (!tabu[p]) open.push_back(p);

    while (!open.empty()) {
      double longest = -std::numeric_limits<double>::infinity();
      double shortest = std::numeric_limits<double>::infinity();
      for (PipeIndex p : open) {
        longest = std::max(longest, net.pipe(p).length_m);
        shortest = std::min(shortest, net.pipe(p).length_m);
      }
      const double threshold = longest - alpha * (longest - shortest);
      rcl.clear();
      unprotected.clear();
      for (PipeIndex p : open) {
        if (net.pipe(p).length_m < threshold) continue;
        rcl.push_back(p);
        if (!ctx.is_protected(p)) unprotected.push_back(p);
      }
      const auto& choices = unprotected.empty() ? rcl : unprotected;
      const PipeIndex p = choices[uniform_index(ctx.rng(), choices.size())];

      if (s[p] > factor) {
        Solution candidate = s;
        candidate[p] -= factor;
        if (ctx.feasible(candidate)) {
          s = std::move(candidate);
          improve = true;
        } else {
          tabu[p] = true;
        }
      }
      erase_value(open, p);
    }
  }
  return s;
}

Solution dispersed_perturbation(SearchContext& ctx, const Solution& s, double alpha) {
  const Network& net = ctx.network();
  const TypeIndex largest = ctx.catalog().largest();
  std::vector<PipeIndex> open;
  std::vector<PipeIndex> batch;
  for (std::size_t m = batch_size(alpha, net.pipe_count()); m > 0; m /= 2) {
    open.resize(net.pipe_count());
    for (PipeIndex p = 0; p < open.size(); ++p) open[p] = p;
    while (!open.empty()) {
      batch.clear();
      std::sample(open.begin(), open.end(), std::back_inserter(batch), std::min(m, open.size()), ctx.rng());
      Solution candidate = raised(s, batch, largest);
      if (candidate == s || ctx.feasible(candidate)) return candidate;
      erase_value(open, batch[uniform_index(ctx.rng(), batch.size())]);
    }
  }
  return s;
}

std::vector<PipeIndex> selection_criterion(std::span<const PipeIndex> candidates, const LevelMap& levels,
                                           std::size_t m, Rng& rng) {
  if (candidates.empty()) throw ContractViolation("selection needs a nonempty candidate set");
  std::vector<PipeIndex> ordered(candidates.begin(), candidates.end());
  std::sort(ordered.begin(), ordered.end(), [&](PipeIndex a, PipeIndex b) {
    const int la = levels.level(a);
    const int lb = levels.level(b);
    return la != lb ? la < lb : a < b;
  });

  std::vector<PipeIndex> chosen;
  std::size_t remaining = std::min(m, ordered.size());
  std::size_t i = 0;
  while (i < ordered.size() && remaining > 0) {
    const int level = levels.level(ordered[i]);
    std::size_t end = i;
    while (end < ordered.size() && levels.level(ordered[end]) == level) ++end;
    std::size_t unevaluated = end - i;
    for (; i < end && remaining > 0; ++i, --unevaluated) {
      if (uniform01(rng) < static_cast<double>(remaining) / static_cast<double>(unevaluated)) {
        chosen.push_back(ordered[i]);
        --remaining;
      }
    }
    i = end;
  }
  return chosen;
}

std::vector<PipeIndex> costly_pipe_candidates(const Network& net, const PipeTypeCatalog& cat,
                                              const Solution& s, double alpha) {
  constexpr std::size_t kMinCandidates = 5;
  const std::size_t n = net.pipe_count();
  if (n == 0) return {};
  std::vector<double> psi(n);
  for (PipeIndex p = 0; p < n; ++p) psi[p] = pipe_cost(s, p, net, cat);
  const auto [lo, hi] = std::minmax_element(psi.begin(), psi.end());
  const double threshold = *hi - alpha * (*hi - *lo);

  std::vector<PipeIndex> by_cost(n);
  for (PipeIndex p = 0; p < n; ++p) by_cost[p] = p;
  std::stable_sort(by_cost.begin(), by_cost.end(), [&](PipeIndex a, PipeIndex b) { return psi[a] > psi[b]; });
  std::size_t count = 0;
  while (count < n && psi[by_cost[count]] >= threshold) ++count;
  count = std::max(count, std::min(kMinCandidates, n));
  std::vector<PipeIndex> out(by_cost.begin(), by_cost.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(out.begin(), out.end());
  return out;
}

Solution concentrated_perturbation(SearchContext& ctx, const Solution& s, double alpha) {
  const Network& net = ctx.network();
  const std::vector<PipeIndex> rcl = costly_pipe_candidates(net, ctx.catalog(), s, alpha);
  if (rcl.empty()) return s;
  const PipeIndex center = rcl[uniform_index(ctx.rng(), rcl.size())];
  const std::array<NodeIndex, 2> seeds{net.pipe(center).from, net.pipe(center).to};
  const LevelMap levels = bfs_levels(net, seeds);
  const TypeIndex largest = ctx.catalog().largest();

  std::vector<PipeIndex> open;
  for (std::size_t m = batch_size(alpha, net.pipe_count()); m > 0; m /= 2) {
    open.clear();
    for (PipeIndex p = 0; p < net.pipe_count(); ++p)
      if (p != center) open.push_back(p);
    while (!open.empty()) {
      const std::vector<PipeIndex> batch = selection_criterion(open, levels, m, ctx.rng());
      Solution candidate = raised(s, batch, largest);
      if (candidate == s || ctx.feasible(candidate)) return candidate;
      erase_value(open, batch[uniform_index(ctx.rng(), batch.size())]);
    }
  }
  return s;
}

CostedSolution acceptance_criterion(CostedSolution& best, const CostedSolution& cand,
                                    const CostedSolution& cur, Pool* pool, Rng& rng) {
  if (cand.cost < cur.cost) {
    if (cand.cost < best.cost) best = cand;
    else if (pool) pool->replace_worst(cand);
    return cand;
  }
  const std::size_t pooled = pool ? pool->size() : 0;
  const std::size_t pick = uniform_index(rng, pooled + 1);
  return pick == pooled ? best : (*pool)[pick];
}

RunResult run(const Network& net, const PipeTypeCatalog& cat, const FeasibilityCheck& check,
              const SearchParams& params, const IterationHook& hook,
              const std::function<std::uint64_t()>& simulator_calls) {
  params.check();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  const Features features = features_of(params.variant);
  SearchContext ctx(net, cat, check, params.seed);
  const double alpha = params.alpha;

  Solution initial = initial_solution(net, cat, [&](const Solution& s) { return ctx.feasible(s); });
  CostedSolution best{initial, ctx.cost(initial)};
  CostedSolution cur = best;
  std::optional<Pool> pool;
  if (features.solution_pool) pool.emplace(static_cast<std::size_t>(params.pool_size), best);
  if (features.shortest_path_protection) ctx.set_protected_pipes(path_list(net, shortest_path_tree(net), alpha));
  int factor = features.aggressive_reduction ? params.factor : 1;
  const double dispersed_probability = params.dispersed_probability.value_or(1.0 - alpha);

  RunResult result;
  SearchStats& stats = result.stats;
  stats.best_cost_trace.push_back({elapsed(), best.cost});

  auto done = [&] {
    if (params.target_cost && best.cost <= *params.target_cost) return true;
    if (params.max_iterations && stats.iterations >= *params.max_iterations) return true;
    return elapsed() >= params.time_limit_s;
  };

  while (!done()) {
    ++stats.iterations;
    const int used_factor = factor;
    Solution improved = local_search(ctx, cur.solution, factor, alpha);
    CostedSolution cand{improved, ctx.cost(improved)};
    if (factor > 1) factor /= 2;

    const double previous_best = best.cost;
    CostedSolution accepted = acceptance_criterion(best, cand, cur, pool ? &*pool : nullptr, ctx.rng());
    if (best.cost < previous_best) stats.best_cost_trace.push_back({elapsed(), best.cost});

    const bool dispersed = uniform01(ctx.rng()) <= dispersed_probability || !features.concentrated_perturbation;
    Solution perturbed = dispersed ? dispersed_perturbation(ctx, accepted.solution, alpha)
                                   : concentrated_perturbation(ctx, accepted.solution, alpha);
    cur = {perturbed, ctx.cost(perturbed)};

    if (hook) hook({stats.iterations, used_factor, cand.cost, cur.cost, best.cost, elapsed()});
  }

  stats.tested_solutions = ctx.tested();
  stats.feasible_tested = ctx.feasible_count();
  if (simulator_calls) stats.simulator_calls = simulator_calls();
  result.best = std::move(best);
  return result;
}

RunResult run(const Network& net, const PipeTypeCatalog& cat, const HydraulicLimits& limits,
              const SearchParams& params, const IterationHook& hook, const SolverConfig& cfg) {
  const Validator validator(net, cat, limits, cfg);
  return run(
      net, cat, [&](const Solution& s) { return validator(s).feasible; }, params, hook,
      [&] { return validator.simulator_calls(); });
}

CostedSolution brute_force_optimum(const Network& net, const PipeTypeCatalog& cat,
                                   const FeasibilityCheck& check, std::uint64_t limit) {
  const auto types = static_cast<std::uint64_t>(cat.size());
  std::uint64_t space = 1;
  for (std::size_t i = 0; i < net.pipe_count(); ++i) {
    if (space > limit / types) throw ContractViolation("search space exceeds the enumeration limit");
    space *= types;
  }
  if (space > limit) throw ContractViolation("search space exceeds the enumeration limit");

  Solution s(net.pipe_count(), 1);
  std::optional<CostedSolution> best;
  for (std::uint64_t i = 0; i < space; ++i) {
    const double cost = solution_cost(s, net, cat);
    // Only cheaper assignments can change the answer, so only they are validated.
    if ((!best || cost < best->cost) && check(s)) best = CostedSolution{s, cost};
    for (PipeIndex p = 0; p < s.size(); ++p) {
      if (s[p] < cat.largest()) {
        ++s[p];
        break;
      }
      s[p] = 1;
    }
  }
  if (!best) throw InfeasibleInstance("infeasible instance: no assignment satisfies the constraints");
  return *best;
}

}  // namespace wdnd
