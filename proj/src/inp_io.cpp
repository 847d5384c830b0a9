#include "wdnd/inp_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "wdnd/errors.hpp"

namespace wdnd {

namespace {

struct Record {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> to_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

double number(const Record& r, std::size_t i, std::string_view what) {
  if (i >= r.fields.size()) throw ParseError(r.line, "missing " + std::string(what));
  auto v = to_number(r.fields[i]);
  if (!v) throw ParseError(r.line, "invalid " + std::string(what) + " '" + r.fields[i] + "'");
  return *v;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

using Sections = std::map<std::string, std::vector<Record>>;

Sections read_sections(std::istream& in) {
  static const std::array<std::string_view, 10> kKnown = {
      "TITLE", "JUNCTIONS", "RESERVOIRS", "PIPES", "PATTERNS",
      "DEMANDS", "TIMES", "OPTIONS", "COORDINATES", "END"};
  static const std::array<std::string_view, 3> kUnsupported = {"TANKS", "PUMPS", "VALVES"};

  Sections sections;
  std::string current;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      auto close = line.find(']');
      if (close == std::string_view::npos) throw ParseError(line_no, "unterminated section header");
      current = upper(trim(line.substr(1, close - 1)));
      if (current == "END") break;
      continue;
    }
    if (current.empty()) throw ParseError(line_no, "data outside of any section");
    if (std::find(kUnsupported.begin(), kUnsupported.end(), current) != kUnsupported.end())
      throw ParseError(line_no, "section [" + current + "] is not supported (gravity-fed pipes only)");
    if (current == "TITLE" || current == "TIMES" || current == "COORDINATES") continue;
    if (std::find(kKnown.begin(), kKnown.end(), current) == kKnown.end()) continue;
    sections[current].push_back({line_no, split_whitespace(line)});
  }
  return sections;
}

}  // namespace

Network parse_instance(std::istream& in) {
  Sections sections = read_sections(in);

  double flow_scale = 0.001;  // LPS unless told otherwise
  std::string default_pattern = "1";
  for (const Record& r : sections["OPTIONS"]) {
    const std::string key = upper(r.fields[0]);
    if (key == "UNITS") {
      if (r.fields.size() < 2) throw ParseError(r.line, "missing units keyword");
      const std::string units = upper(r.fields[1]);
      if (units == "LPS") flow_scale = 0.001;
      else if (units == "CMS") flow_scale = 1.0;
      else throw ParseError(r.line, "unsupported units '" + r.fields[1] + "' (expected LPS or CMS)");
    } else if (key == "PATTERN" && r.fields.size() >= 2) {
      default_pattern = r.fields[1];
    }
  }

  std::map<std::string, std::vector<double>> patterns;
  std::size_t period_count = 0;
  for (const Record& r : sections["PATTERNS"]) {
    auto& values = patterns[r.fields[0]];
    for (std::size_t i = 1; i < r.fields.size(); ++i) {
      double m = number(r, i, "pattern multiplier");
      if (m < 0.0) throw ParseError(r.line, "negative pattern multiplier");
      values.push_back(m);
    }
  }
  for (const auto& [id, values] : patterns) period_count = std::max(period_count, values.size());
  if (period_count == 0) period_count = kDefaultPeriodCount;
  const bool has_default_pattern = patterns.count(default_pattern) > 0;

  auto pattern_of = [&](const Record& r, std::size_t i) -> std::string {
    if (i < r.fields.size()) {
      if (!patterns.count(r.fields[i])) throw ParseError(r.line, "unknown pattern '" + r.fields[i] + "'");
      return r.fields[i];
    }
    return has_default_pattern ? default_pattern : std::string();
  };

  std::vector<Node> nodes;
  std::map<std::string, NodeIndex> node_index;
  auto add_node = [&](const Record& r, Node node) {
    if (!node_index.emplace(node.id, nodes.size()).second)
      throw ParseError(r.line, "duplicate node id '" + node.id + "'");
    nodes.push_back(std::move(node));
  };

  std::vector<bool> has_primary;
  for (const Record& r : sections["JUNCTIONS"]) {
    Node node;
    node.id = r.fields[0];
    node.kind = NodeKind::junction;
    node.elevation = number(r, 1, "junction elevation");
    if (r.fields.size() >= 3) {
      double base = number(r, 2, "junction demand") * flow_scale;
      if (base < 0.0) throw ParseError(r.line, "negative junction demand");
      node.demands.push_back({base, pattern_of(r, 3)});
    }
    has_primary.push_back(!node.demands.empty());
    add_node(r, std::move(node));
  }
  for (const Record& r : sections["RESERVOIRS"]) {
    Node node;
    node.id = r.fields[0];
    node.kind = NodeKind::reservoir;
    node.fixed_head = number(r, 1, "reservoir head");
    node.elevation = *node.fixed_head;
    add_node(r, std::move(node));
  }

  // As in EPANET, the first [DEMANDS] row of a junction replaces the demand
  // given in [JUNCTIONS]; later rows add categories.
  for (const Record& r : sections["DEMANDS"]) {
    auto it = node_index.find(r.fields[0]);
    if (it == node_index.end()) throw ParseError(r.line, "unknown junction '" + r.fields[0] + "'");
    Node& node = nodes[it->second];
    if (node.is_reservoir()) throw ParseError(r.line, "demand assigned to reservoir '" + node.id + "'");
    double base = number(r, 1, "demand") * flow_scale;
    if (base < 0.0) throw ParseError(r.line, "negative demand");
    DemandCategory category{base, pattern_of(r, 2)};
    if (has_primary[it->second]) {
      node.demands.front() = std::move(category);
      has_primary[it->second] = false;
    } else {
      node.demands.push_back(std::move(category));
    }
  }

  std::vector<Pipe> pipes;
  std::map<std::string, std::size_t> pipe_ids;
  for (const Record& r : sections["PIPES"]) {
    if (r.fields.size() < 4) throw ParseError(r.line, "pipe needs id, two nodes and a length");
    Pipe pipe;
    pipe.id = r.fields[0];
    if (!pipe_ids.emplace(pipe.id, pipes.size()).second)
      throw ParseError(r.line, "duplicate pipe id '" + pipe.id + "'");
    for (int end = 0; end < 2; ++end) {
      const std::string& ref = r.fields[1 + end];
      auto it = node_index.find(ref);
      if (it == node_index.end())
        throw ParseError(r.line, "pipe '" + pipe.id + "' references unknown node '" + ref + "'");
      (end == 0 ? pipe.from : pipe.to) = it->second;
    }
    if (pipe.from == pipe.to) throw ParseError(r.line, "pipe '" + pipe.id + "' connects a node to itself");
    pipe.length_m = number(r, 3, "pipe length");
    if (!(pipe.length_m > 0.0)) throw ParseError(r.line, "pipe '" + pipe.id + "' has nonpositive length");
    pipes.push_back(std::move(pipe));
  }

  return Network(std::move(nodes), std::move(pipes), DemandModel(std::move(patterns), period_count));
}

Network parse_instance_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_instance(in);
}

Network load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open instance file '" + path + "'");
  return parse_instance(in);
}

void write_instance(const Network& net, std::ostream& out) {
  const auto& patterns = net.demand_model().patterns();
  out << "[TITLE]\n" << "written by wdnd\n\n[JUNCTIONS]\n";
  bool constant_demand = false;
  for (NodeIndex n : net.junctions()) {
    out << net.node(n).id << '\t' << format_number(net.node(n).elevation) << '\n';
    for (const DemandCategory& c : net.node(n).demands) constant_demand |= c.pattern_id.empty();
  }
  out << "\n[RESERVOIRS]\n";
  for (NodeIndex n : net.reservoirs())
    out << net.node(n).id << '\t' << format_number(*net.node(n).fixed_head) << '\n';
  out << "\n[PIPES]\n";
  for (const Pipe& p : net.pipes())
    out << p.id << '\t' << net.node(p.from).id << '\t' << net.node(p.to).id << '\t'
        << format_number(p.length_m) << "\t100\t130\n";
  out << "\n[PATTERNS]\n";
  for (const auto& [id, values] : patterns) {
    for (std::size_t i = 0; i < values.size(); i += 6) {
      out << id;
      for (std::size_t j = i; j < std::min(values.size(), i + 6); ++j) out << '\t' << format_number(values[j]);
      out << '\n';
    }
  }
  out << "\n[DEMANDS]\n";
  for (NodeIndex n : net.junctions())
    for (const DemandCategory& c : net.node(n).demands)
      out << net.node(n).id << '\t' << format_number(c.base_load) << (c.pattern_id.empty() ? "" : "\t")
          << c.pattern_id << '\n';
  out << "\n[OPTIONS]\nUnits\tCMS\n";
  if (constant_demand) {
    // Keep pattern-less demands constant even if a pattern named "1" exists.
    std::string unused = "constant";
    while (patterns.count(unused)) unused += '_';
    out << "Pattern\t" << unused << '\n';
  }
  out << "\n[END]\n";
  if (!out) throw Error("failed to write instance");
}

PipeTypeCatalog parse_type_catalog(std::istream& in) {
  std::vector<PipeType> types;
  std::string raw;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    std::string normalized(line);
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    Record r{line_no, split_whitespace(normalized)};
    if (first_row) {
      first_row = false;
      if (!to_number(r.fields[0])) continue;  // header
    }
    if (r.fields.size() != 4) throw ParseError(line_no, "expected index,diameter_mm,roughness,unit_cost");
    PipeType t;
    double index = number(r, 0, "type index");
    t.index = static_cast<TypeIndex>(index);
    if (static_cast<double>(t.index) != index) throw ParseError(line_no, "type index must be an integer");
    t.diameter_mm = number(r, 1, "diameter");
    t.roughness = number(r, 2, "roughness");
    t.unit_cost = number(r, 3, "unit cost");
    if (!(t.diameter_mm > 0.0) || !(t.roughness > 0.0) || !(t.unit_cost > 0.0))
      throw ParseError(line_no, "diameter, roughness and cost must be positive");
    if (!types.empty() && t.diameter_mm < types.back().diameter_mm)
      throw ParseError(line_no, "diameters must be sorted nondecreasing");
    if (!types.empty() && t.unit_cost < types.back().unit_cost)
      throw ParseError(line_no, "unit costs must be sorted nondecreasing");
    types.push_back(t);
  }
  return PipeTypeCatalog(std::move(types));
}

PipeTypeCatalog parse_type_catalog_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_type_catalog(in);
}

PipeTypeCatalog load_type_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open catalog file '" + path + "'");
  return parse_type_catalog(in);
}

Solution parse_solution(std::istream& in, const Network& net) {
  std::vector<TypeIndex> types(net.pipe_count(), 0);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    Record r{line_no, split_whitespace(line)};
    if (r.fields.empty()) continue;
    if (r.fields.size() != 2) throw ParseError(line_no, "expected 'pipe_id type_index'");
    auto p = net.find_pipe(r.fields[0]);
    if (!p) throw ParseError(line_no, "unknown pipe '" + r.fields[0] + "'");
    if (types[*p] != 0) throw ParseError(line_no, "pipe '" + r.fields[0] + "' assigned twice");
    double t = number(r, 1, "type index");
    if (t < 1 || static_cast<double>(static_cast<TypeIndex>(t)) != t)
      throw ParseError(line_no, "invalid type index '" + r.fields[1] + "'");
    types[*p] = static_cast<TypeIndex>(t);
  }
  for (PipeIndex p = 0; p < types.size(); ++p)
    if (types[p] == 0) throw ContractViolation("solution file misses pipe '" + net.pipe(p).id + "'");
  return Solution(std::move(types));
}

void write_solution(const Solution& s, const Network& net, std::ostream& out) {
  if (s.size() != net.pipe_count()) throw ContractViolation("solution does not match the network");
  for (PipeIndex p = 0; p < s.size(); ++p) out << net.pipe(p).id << '\t' << s[p] << '\n';
  if (!out) throw Error("failed to write solution");
}

void write_run_record(const RunRecord& rec, std::ostream& sink) {
  nlohmann::ordered_json j;
  j["instance_id"] = rec.instance_id;
  j["seed"] = rec.seed;
  j["time_limit_s"] = rec.time_limit_s;
  j["variant"] = rec.variant;
  j["best_cost"] = rec.best_cost;
  j["time_to_best_s"] = rec.time_to_best_s;
  j["iterations"] = rec.iterations;
  j["simulator_calls"] = rec.simulator_calls;
  j["tested_solutions"] = rec.tested_solutions;
  j["feasible_fraction"] = rec.feasible_fraction;
  if (!rec.error.empty()) j["error"] = rec.error;
  sink << j.dump() << '\n';
  if (!sink) throw Error("failed to write run record");
}

RunRecord parse_run_record(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("malformed run record: ") + e.what());
  }
  RunRecord rec;
  try {
    rec.instance_id = j.at("instance_id").get<std::string>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.time_limit_s = j.at("time_limit_s").get<double>();
    rec.variant = j.at("variant").get<std::string>();
    rec.best_cost = j.at("best_cost").get<double>();
    rec.time_to_best_s = j.at("time_to_best_s").get<double>();
    rec.iterations = j.at("iterations").get<std::uint64_t>();
    rec.simulator_calls = j.at("simulator_calls").get<std::uint64_t>();
    rec.tested_solutions = j.at("tested_solutions").get<std::uint64_t>();
    rec.feasible_fraction = j.at("feasible_fraction").get<double>();
    if (j.contains("error")) rec.error = j.at("error").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("incomplete run record: ") + e.what());
  }
  return rec;
}

}  // namespace wdnd
