#include "wdnd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "wdnd/errors.hpp"

namespace wdnd {

namespace fs = std::filesystem;

void ExperimentPlan::check() const {
  if (instances.empty()) throw ContractViolation("plan lists no instances");
  if (seeds.empty()) throw ContractViolation("plan lists no seeds");
  if (time_limits.empty()) throw ContractViolation("plan lists no time limits");
  if (variants.empty()) throw ContractViolation("plan lists no variants");
  if (catalog.empty()) throw ContractViolation("plan names no catalog");
  if (jobs == 0) throw ContractViolation("jobs must be at least 1");
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string unquote(std::string s) {
  s = trim(std::move(s));
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> list_of(std::string value) {
  value = trim(std::move(value));
  if (!value.empty() && value.front() == '[') {
    if (value.back() != ']') throw ContractViolation("unterminated list '" + value + "'");
    value = value.substr(1, value.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = unquote(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ContractViolation("plan key '" + key + "': '" + v + "' is not a number");
  }
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d)))
    throw ContractViolation("plan key '" + key + "': '" + v + "' is not a nonnegative integer");
  return static_cast<std::uint64_t>(d);
}

}  // namespace

ExperimentPlan parse_plan(std::istream& in, const std::string& base_dir) {
  ExperimentPlan plan;
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base_dir) / path).lexically_normal().string();
  };
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string line = trim(raw);
    if (line.empty() || line.front() == '[') continue;  // blank or table header
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "instances") {
      for (const auto& p : list_of(value)) plan.instances.push_back(resolve(p));
    } else if (key == "catalog") {
      plan.catalog = resolve(unquote(value));
    } else if (key == "time_limits") {
      plan.time_limits.clear();
      for (const auto& v : list_of(value)) plan.time_limits.push_back(to_double(key, v));
    } else if (key == "seeds") {
      plan.seeds.clear();
      const auto items = list_of(value);
      if (value.front() != '[' && items.size() == 1) {
        for (std::uint64_t s = 1; s <= to_count(key, items[0]); ++s) plan.seeds.push_back(s);
      } else {
        for (const auto& v : items) plan.seeds.push_back(to_count(key, v));
      }
    } else if (key == "variants") {
      plan.variants.clear();
      for (const auto& v : list_of(value)) plan.variants.push_back(parse_variant(v));
    } else if (key == "h_min") {
      plan.limits.min_pressure = to_double(key, value);
    } else if (key == "v_max") {
      plan.limits.max_velocity = to_double(key, value);
    } else if (key == "alpha") {
      plan.alpha = to_double(key, value);
    } else if (key == "factor") {
      plan.factor = static_cast<int>(to_count(key, value));
    } else if (key == "pool") {
      plan.pool_size = static_cast<int>(to_count(key, value));
    } else if (key == "max_iterations") {
      plan.max_iterations = to_count(key, value);
    } else if (key == "pert_prob") {
      plan.dispersed_probability = to_double(key, value);
    } else if (key == "output") {
      plan.output = resolve(unquote(value));
    } else if (key == "jobs") {
      plan.jobs = static_cast<unsigned>(to_count(key, value));
    } else {
      throw ParseError(line_no, "unknown plan key '" + key + "'");
    }
  }
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open plan file '" + path + "'");
  return parse_plan(in, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

std::string instance_id_of(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<RunRecord> run_experiment(const ExperimentPlan& plan,
                                      const std::function<void(const RunRecord&)>& on_record) {
  plan.check();
  const PipeTypeCatalog catalog = load_type_catalog(plan.catalog);

  // Sort instances by id so the record order does not depend on the plan order.
  std::vector<std::string> instances = plan.instances;
  std::stable_sort(instances.begin(), instances.end(),
                   [](const auto& a, const auto& b) { return instance_id_of(a) < instance_id_of(b); });
  std::vector<double> limits = plan.time_limits;
  std::sort(limits.begin(), limits.end());
  std::vector<std::uint64_t> seeds = plan.seeds;
  std::sort(seeds.begin(), seeds.end());
  std::vector<Variant> variants = plan.variants;
  std::sort(variants.begin(), variants.end(),
            [](Variant a, Variant b) { return to_string(a) < to_string(b); });

  struct Task {
    std::size_t instance = 0;
    double limit = 0;
    std::uint64_t seed = 0;
    Variant variant = Variant::full;
  };
  std::vector<std::unique_ptr<Network>> networks(instances.size());
  std::vector<RunRecord> records;
  std::vector<Task> tasks;
  std::vector<std::size_t> slot_of_task;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    try {
      networks[i] = std::make_unique<Network>(load_instance(instances[i]));
    } catch (const Error& e) {
      RunRecord rec;
      rec.instance_id = instance_id_of(instances[i]);
      rec.error = e.what();
      records.push_back(rec);
      continue;
    }
    for (double limit : limits)
      for (std::uint64_t seed : seeds)
        for (Variant v : variants) {
          slot_of_task.push_back(records.size());
          tasks.push_back({i, limit, seed, v});
          RunRecord rec;
          rec.instance_id = instance_id_of(instances[i]);
          rec.seed = seed;
          rec.time_limit_s = limit;
          rec.variant = to_string(v);
          records.push_back(rec);
        }
  }

  std::vector<bool> finished(records.size(), false);
  for (std::size_t r = 0; r < records.size(); ++r) finished[r] = !records[r].error.empty();
  std::mutex mutex;
  std::size_t emitted = 0;
  auto flush = [&] {  // caller holds the mutex
    while (emitted < records.size() && finished[emitted]) {
      if (on_record) on_record(records[emitted]);
      ++emitted;
    }
  };
  {
    std::lock_guard lock(mutex);
    flush();
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      const Task& task = tasks[t];
      RunRecord rec = records[slot_of_task[t]];
      try {
        SearchParams params;
        params.alpha = plan.alpha;
        params.factor = plan.factor;
        params.pool_size = plan.pool_size;
        params.time_limit_s = task.limit;
        params.seed = task.seed;
        params.variant = task.variant;
        params.max_iterations = plan.max_iterations;
        params.dispersed_probability = plan.dispersed_probability;
        const RunResult result = run(*networks[task.instance], catalog, plan.limits, params, {}, plan.solver);
        rec.best_cost = result.best.cost;
        rec.time_to_best_s = result.stats.time_to_best_s();
        rec.iterations = result.stats.iterations;
        rec.simulator_calls = result.stats.simulator_calls;
        rec.tested_solutions = result.stats.tested_solutions;
        rec.feasible_fraction = result.stats.feasible_fraction();
      } catch (const Error& e) {
        rec.error = e.what();
      }
      std::lock_guard lock(mutex);
      records[slot_of_task[t]] = std::move(rec);
      finished[slot_of_task[t]] = true;
      flush();
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(plan.jobs, static_cast<unsigned>(tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return records;
}

double gain_pct(double z_variant, double z_baseline) {
  if (!(z_baseline > 0.0)) throw DomainError("gain needs a positive baseline cost");
  return 100.0 * (z_baseline - z_variant) / z_baseline;
}

double deviation_pct(double z, double z_best) {
  if (!(z_best > 0.0)) throw DomainError("deviation needs a positive reference cost");
  return 100.0 * (z - z_best) / z_best;
}

Summary summarize(const std::vector<RunRecord>& records) {
  Summary summary;
  // (instance, limit, variant) -> costs
  std::map<std::tuple<std::string, double, std::string>, std::vector<double>> costs;
  std::set<std::string> variants;
  std::set<double> limits;
  for (const RunRecord& r : records) {
    if (!r.error.empty()) continue;
    costs[{r.instance_id, r.time_limit_s, r.variant}].push_back(r.best_cost);
    variants.insert(r.variant);
    limits.insert(r.time_limit_s);
  }

  std::map<std::pair<std::string, double>, double> best_known;
  for (const auto& [key, zs] : costs) {
    const auto& [instance, limit, variant] = key;
    VariantResult vr{instance, limit, variant, *std::min_element(zs.begin(), zs.end()), 0.0, zs.size()};
    for (double z : zs) vr.average_cost += z;
    vr.average_cost /= static_cast<double>(zs.size());
    summary.results.push_back(vr);
    auto [it, inserted] = best_known.emplace(std::make_pair(instance, limit), vr.best_cost);
    if (!inserted) it->second = std::min(it->second, vr.best_cost);
  }

  for (double limit : limits) {
    for (const std::string& variant : variants) {
      DeviationRow row{limit, variant, 0.0, 0};
      for (const auto& [key, zs] : costs) {
        const auto& [instance, l, v] = key;
        if (l != limit || v != variant) continue;
        for (double z : zs) {
          row.average_deviation_pct += deviation_pct(z, best_known.at({instance, limit}));
          ++row.runs;
        }
      }
      if (row.runs == 0) continue;
      row.average_deviation_pct /= static_cast<double>(row.runs);
      summary.deviations.push_back(row);
    }
  }

  if (variants.size() < 2) {
    summary.notes.push_back("gains omitted: records cover a single variant");
    return summary;
  }

  auto lookup = [&](const std::string& instance, double limit, const std::string& variant) {
    for (const VariantResult& vr : summary.results)
      if (vr.instance_id == instance && vr.time_limit_s == limit && vr.variant == variant) return &vr;
    return static_cast<const VariantResult*>(nullptr);
  };
  for (double limit : limits) {
    std::map<std::string, std::set<std::string>> instances_of;
    for (const VariantResult& vr : summary.results)
      if (vr.time_limit_s == limit) instances_of[vr.variant].insert(vr.instance_id);
    for (const auto& [a, a_instances] : instances_of) {
      for (const auto& [b, b_instances] : instances_of) {
        if (a == b) continue;
        if (a_instances != b_instances)
          throw PairingError("variants '" + a + "' and '" + b + "' cover different instances at time limit " +
                             std::to_string(limit));
        GainRow row{limit, a, b, 0.0, 0.0, a_instances.size()};
        for (const std::string& instance : a_instances) {
          const VariantResult* ra = lookup(instance, limit, a);
          const VariantResult* rb = lookup(instance, limit, b);
          row.best_gain_pct += gain_pct(ra->best_cost, rb->best_cost);
          row.average_gain_pct += gain_pct(ra->average_cost, rb->average_cost);
        }
        row.best_gain_pct /= static_cast<double>(row.instances);
        row.average_gain_pct /= static_cast<double>(row.instances);
        summary.gains.push_back(row);
      }
    }
  }
  return summary;
}

void write_summary(const Summary& summary, std::ostream& out) {
  out << std::fixed;
  out << "instance\tlimit_s\tvariant\truns\tbest\taverage\n";
  for (const auto& r : summary.results)
    out << r.instance_id << '\t' << std::setprecision(0) << r.time_limit_s << '\t' << r.variant << '\t'
        << r.runs << '\t' << std::setprecision(2) << r.best_cost << '\t' << r.average_cost << '\n';
  out << "\nlimit_s\tvariant\truns\tavg_deviation_pct\n";
  for (const auto& d : summary.deviations)
    out << std::setprecision(0) << d.time_limit_s << '\t' << d.variant << '\t' << d.runs << '\t'
        << std::setprecision(3) << d.average_deviation_pct << '\n';
  if (!summary.gains.empty()) {
    out << "\nlimit_s\tvariant\tbaseline\tinstances\tbest_gain_pct\tavg_gain_pct\n";
    for (const auto& g : summary.gains)
      out << std::setprecision(0) << g.time_limit_s << '\t' << g.variant << '\t' << g.baseline << '\t'
          << g.instances << '\t' << std::setprecision(3) << g.best_gain_pct << '\t' << g.average_gain_pct
          << '\n';
  }
  for (const auto& note : summary.notes) out << "note: " << note << '\n';
  out.unsetf(std::ios::floatfield);
}

}  // namespace wdnd
