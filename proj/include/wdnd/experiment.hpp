#pragma once

// Seeded replication grids over instances, time limits and variants, plus
// the gain / deviation statistics used to compare variants.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wdnd/errors.hpp"
#include "wdnd/hydraulics.hpp"
#include "wdnd/ils.hpp"
#include "wdnd/inp_io.hpp"

namespace wdnd {

struct ExperimentPlan {
  std::vector<std::string> instances;
  std::string catalog;
  std::vector<double> time_limits{60, 180, 300, 600};
  std::vector<std::uint64_t> seeds;
  std::vector<Variant> variants{Variant::full};
  HydraulicLimits limits;
  SolverConfig solver;
  double alpha = 0.05;
  int factor = 4;
  int pool_size = 3;
  std::optional<std::uint64_t> max_iterations;
  std::optional<double> dispersed_probability;
  std::string output;  // empty: caller decides
  unsigned jobs = 1;

  void check() const;
};

/// Reads the `key = value` plan format; list values are `[a, b, ...]` or
/// comma separated, `seeds = N` means seeds 1..N. Relative paths resolve
/// against `base_dir`.
ExperimentPlan parse_plan(std::istream& in, const std::string& base_dir = ".");
ExperimentPlan load_plan(const std::string& path);

/// File stem used as instance_id in records.
std::string instance_id_of(const std::string& path);

/// One record per (instance, time limit, seed, variant), ordered that way.
/// An instance that fails to load yields a single error record. Runs execute
/// on up to `plan.jobs` threads; `on_record` (if set) sees records in order.
std::vector<RunRecord> run_experiment(const ExperimentPlan& plan,
                                      const std::function<void(const RunRecord&)>& on_record = {});

/// Inconsistent record sets handed to summarize.
class PairingError : public Error {
 public:
  using Error::Error;
};

struct VariantResult {
  std::string instance_id;
  double time_limit_s = 0.0;
  std::string variant;
  double best_cost = 0.0;
  double average_cost = 0.0;
  std::size_t runs = 0;
};

struct GainRow {
  double time_limit_s = 0.0;
  std::string variant;   // A
  std::string baseline;  // B
  double best_gain_pct = 0.0;     // mean over instances of 100 (zB - zA) / zB on best costs
  double average_gain_pct = 0.0;  // same on average costs
  std::size_t instances = 0;
};

struct DeviationRow {
  double time_limit_s = 0.0;
  std::string variant;
  double average_deviation_pct = 0.0;  // mean over runs of 100 (z - z_best) / z_best
  std::size_t runs = 0;
};

struct Summary {
  std::vector<VariantResult> results;
  std::vector<GainRow> gains;
  std::vector<DeviationRow> deviations;
  std::vector<std::string> notes;
};

/// 100 (z_baseline - z_variant) / z_baseline.
double gain_pct(double z_variant, double z_baseline);
/// 100 (z - z_best) / z_best.
double deviation_pct(double z, double z_best);

/// Pure function of the records; error records are skipped.
Summary summarize(const std::vector<RunRecord>& records);
void write_summary(const Summary& summary, std::ostream& out);

}  // namespace wdnd
