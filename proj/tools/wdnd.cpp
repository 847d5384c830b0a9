// wdnd: command-line front end for pipe sizing of gravity-fed networks.
//
//   wdnd optimize   --instance F --catalog C [--time-limit S --seed N ...]
//   wdnd validate   --instance F --catalog C (--solution S | --uniform T)
//   wdnd bruteforce --instance F --catalog C [--limit N]
//   wdnd bench      --plan P [--jobs J]
//   wdnd summarize  --records R
//
// Exit codes: 0 success, 2 infeasible, 3 input error.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wdnd/errors.hpp"
#include "wdnd/experiment.hpp"
#include "wdnd/hydraulics.hpp"
#include "wdnd/ils.hpp"
#include "wdnd/inp_io.hpp"

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitInputError = 3;
constexpr const char* kCatalogEnv = "WDND_CATALOG";

std::string default_catalog() {
  const char* env = std::getenv(kCatalogEnv);
  return env ? env : "";
}

std::string require_catalog(const std::string& given) {
  if (!given.empty()) return given;
  throw wdnd::ContractViolation(std::string("no catalog given (use --catalog or set ") + kCatalogEnv + ")");
}

// Appends to `path`, or writes to stdout when the path is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::app);
      if (!*file_) throw wdnd::InstanceError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipe sizing for gravity-fed water distribution networks"};
  app.require_subcommand(1);

  std::string instance;
  std::string catalog = default_catalog();
  wdnd::HydraulicLimits limits;
  auto add_instance_options = [&](CLI::App* cmd) {
    cmd->add_option("--instance", instance, "EPANET-style instance file")->required();
    cmd->add_option("--catalog", catalog, "pipe type catalog CSV (default: $WDND_CATALOG)");
    cmd->add_option("--h-min", limits.min_pressure, "minimum pressure head in m")->capture_default_str();
    cmd->add_option("--v-max", limits.max_velocity, "maximum velocity in m/s")->capture_default_str();
  };

  wdnd::SearchParams params;
  std::string variant = "full";
  std::string out_path;
  std::string solution_out;
  std::optional<std::uint64_t> max_iterations;
  std::optional<double> pert_prob;
  std::optional<double> target_cost;
  bool log_iterations = false;
  auto* optimize = app.add_subcommand("optimize", "run the iterated local search");
  add_instance_options(optimize);
  optimize->add_option("--time-limit", params.time_limit_s, "wall-clock budget in s")->capture_default_str();
  optimize->add_option("--seed", params.seed, "PRNG seed")->capture_default_str();
  optimize->add_option("--alpha", params.alpha, "greediness factor")->capture_default_str();
  optimize->add_option("--factor", params.factor, "initial type reduction factor")->capture_default_str();
  optimize->add_option("--pool", params.pool_size, "solution pool size")->capture_default_str();
  optimize->add_option("--variant", variant, "full|base|redu-only|pool-only|pert-only|spt-only")
      ->capture_default_str();
  optimize->add_option("--max-iterations", max_iterations, "iteration budget (for reproducible runs)");
  optimize->add_option("--pert-prob", pert_prob, "probability of the dispersed perturbation (default 1-alpha)");
  optimize->add_option("--target-cost", target_cost, "stop once the best cost reaches this value");
  optimize->add_option("--out", out_path, "append the run record here (default stdout)");
  optimize->add_option("--solution-out", solution_out, "write the best solution here");
  optimize->add_flag("--log", log_iterations, "print one line per iteration to stderr");

  std::string solution_path;
  std::optional<int> uniform_type;
  auto* validate = app.add_subcommand("validate", "check one solution against the hydraulic constraints");
  add_instance_options(validate);
  auto* sol_opt = validate->add_option("--solution", solution_path, "solution file (pipe_id type per line)");
  auto* uni_opt = validate->add_option("--uniform", uniform_type, "validate the uniform assignment of this type");
  sol_opt->excludes(uni_opt);

  std::uint64_t limit = 1'000'000;
  auto* brute = app.add_subcommand("bruteforce", "exhaustive optimum for tiny instances");
  add_instance_options(brute);
  brute->add_option("--limit", limit, "largest number of assignments to enumerate")->capture_default_str();

  std::string plan_path;
  std::optional<unsigned> jobs;
  bool print_summary = false;
  auto* bench = app.add_subcommand("bench", "run a replication plan");
  bench->add_option("--plan", plan_path, "plan file")->required();
  bench->add_option("--jobs", jobs, "parallel runs");
  bench->add_option("--out", out_path, "record file (overrides the plan's output)");
  bench->add_flag("--summary", print_summary, "print the summary table to stderr");

  std::string records_path;
  auto* summarize = app.add_subcommand("summarize", "aggregate run records");
  summarize->add_option("--records", records_path, "newline-delimited run records")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) {
      params.variant = wdnd::parse_variant(variant);
      params.max_iterations = max_iterations;
      params.dispersed_probability = pert_prob;
      params.target_cost = target_cost;
      const wdnd::Network net = wdnd::load_instance(instance);
      const wdnd::PipeTypeCatalog cat = wdnd::load_type_catalog(require_catalog(catalog));
      wdnd::IterationHook hook;
      if (log_iterations)
        hook = [](const wdnd::IterationEvent& e) {
          std::cerr << "iter " << e.iteration << " f=" << e.factor << " cand=" << std::fixed
                    << std::setprecision(2) << e.candidate_cost << " cur=" << e.current_cost
                    << " best=" << e.best_cost << " t=" << std::setprecision(3) << e.elapsed_s << '\n';
        };
      const wdnd::RunResult result = wdnd::run(net, cat, limits, params, hook);
      wdnd::RunRecord rec;
      rec.instance_id = wdnd::instance_id_of(instance);
      rec.seed = params.seed;
      rec.time_limit_s = params.time_limit_s;
      rec.variant = wdnd::to_string(params.variant);
      rec.best_cost = result.best.cost;
      rec.time_to_best_s = result.stats.time_to_best_s();
      rec.iterations = result.stats.iterations;
      rec.simulator_calls = result.stats.simulator_calls;
      rec.tested_solutions = result.stats.tested_solutions;
      rec.feasible_fraction = result.stats.feasible_fraction();
      Sink sink(out_path);
      wdnd::write_run_record(rec, sink.stream());
      if (!solution_out.empty()) {
        std::ofstream sol(solution_out);
        if (!sol) throw wdnd::InstanceError("cannot open '" + solution_out + "' for writing");
        wdnd::write_solution(result.best.solution, net, sol);
      }
      return 0;
    }

    if (*validate) {
      const wdnd::Network net = wdnd::load_instance(instance);
      const wdnd::PipeTypeCatalog cat = wdnd::load_type_catalog(require_catalog(catalog));
      wdnd::Solution s;
      if (uniform_type) {
        s = wdnd::Solution(net.pipe_count(), *uniform_type);
      } else if (!solution_path.empty()) {
        std::ifstream in(solution_path);
        if (!in) throw wdnd::InstanceError("cannot open solution file '" + solution_path + "'");
        s = wdnd::parse_solution(in, net);
      } else {
        throw wdnd::ContractViolation("give --solution or --uniform");
      }
      const wdnd::Validator validator(net, cat, limits);
      const wdnd::Verdict verdict = validator(s);
      std::cout << std::setprecision(10) << "cost " << wdnd::solution_cost(s, net, cat) << '\n';
      if (verdict.feasible) {
        std::cout << "feasible\n";
        return 0;
      }
      const wdnd::Violation& v = *verdict.violation;
      std::cout << "infeasible period=" << v.period << " kind=" << wdnd::to_string(v.kind);
      if (v.kind == wdnd::ViolationKind::pressure) std::cout << " node=" << net.node(v.element).id;
      if (v.kind == wdnd::ViolationKind::velocity) std::cout << " pipe=" << net.pipe(v.element).id;
      if (v.kind != wdnd::ViolationKind::non_convergence) std::cout << " value=" << v.value;
      std::cout << '\n';
      return kExitInfeasible;
    }

    if (*brute) {
      const wdnd::Network net = wdnd::load_instance(instance);
      const wdnd::PipeTypeCatalog cat = wdnd::load_type_catalog(require_catalog(catalog));
      const wdnd::Validator validator(net, cat, limits);
      const wdnd::CostedSolution best = wdnd::brute_force_optimum(
          net, cat, [&](const wdnd::Solution& s) { return validator(s).feasible; }, limit);
      std::cout << std::setprecision(10) << "cost " << best.cost << '\n';
      wdnd::write_solution(best.solution, net, std::cout);
      return 0;
    }

    if (*bench) {
      wdnd::ExperimentPlan plan = wdnd::load_plan(plan_path);
      if (jobs) plan.jobs = *jobs;
      if (!out_path.empty()) plan.output = out_path;
      if (plan.catalog.empty()) plan.catalog = require_catalog(catalog);
      Sink sink(plan.output);
      const auto records = wdnd::run_experiment(plan, [&](const wdnd::RunRecord& rec) {
        wdnd::write_run_record(rec, sink.stream());
        sink.stream().flush();
      });
      if (print_summary) wdnd::write_summary(wdnd::summarize(records), std::cerr);
      return 0;
    }

    if (*summarize) {
      std::ifstream in(records_path);
      if (!in) throw wdnd::InstanceError("cannot open records file '" + records_path + "'");
      std::vector<wdnd::RunRecord> records;
      std::string line;
      while (std::getline(in, line))
        if (!line.empty()) records.push_back(wdnd::parse_run_record(line));
      wdnd::write_summary(wdnd::summarize(records), std::cout);
      return 0;
    }
  } catch (const wdnd::InfeasibleInstance& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const wdnd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return 0;
}
