#pragma once

// Text formats: EPANET-style instance files (INP subset), the pipe type
// catalog CSV, solution files, and newline-delimited JSON run records.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "wdnd/network.hpp"

namespace wdnd {

/// Parses the INP subset: TITLE, JUNCTIONS, RESERVOIRS, PIPES, PATTERNS,
/// DEMANDS, TIMES, OPTIONS, COORDINATES and END. Other sections are skipped,
/// except TANKS, PUMPS and VALVES which must be empty.
Network parse_instance(std::istream& in);
Network parse_instance_text(std::string_view text);
Network load_instance(const std::string& path);

/// Writes `net` in the INP subset accepted by parse_instance (flows in CMS).
void write_instance(const Network& net, std::ostream& out);

/// Rows of `index,diameter_mm,roughness,unit_cost`; a header row is optional.
PipeTypeCatalog parse_type_catalog(std::istream& in);
PipeTypeCatalog parse_type_catalog_text(std::string_view text);
PipeTypeCatalog load_type_catalog(const std::string& path);

/// Solution files list `pipe_id type_index` per line; `;` starts a comment.
/// Every pipe must appear exactly once.
Solution parse_solution(std::istream& in, const Network& net);
void write_solution(const Solution& s, const Network& net, std::ostream& out);

struct RunRecord {
  std::string instance_id;
  std::uint64_t seed = 0;
  double time_limit_s = 0.0;
  std::string variant;
  double best_cost = 0.0;
  double time_to_best_s = 0.0;
  std::uint64_t iterations = 0;
  std::uint64_t simulator_calls = 0;
  std::uint64_t tested_solutions = 0;
  double feasible_fraction = 0.0;
  std::string error;  // non-empty for per-instance failures

  bool operator==(const RunRecord&) const = default;
};

/// Appends one JSON line with a fixed field order. Throws Error if the sink fails.
void write_run_record(const RunRecord& rec, std::ostream& sink);
RunRecord parse_run_record(std::string_view line);

}  // namespace wdnd
