// wnlab: command-line front end for the weighted-norm laboratory.
// Subcommands: constants, operators, sparse, corona, testing, sweep, verify,
// report. Exit codes: 0 success, 1 usage error, 2 numeric/validation failure.

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "aplab/characteristics.hpp"
#include "aplab/corona.hpp"
#include "aplab/experiments.hpp"
#include "aplab/maximal.hpp"
#include "aplab/mesh.hpp"
#include "aplab/numfmt.hpp"
#include "aplab/parallel.hpp"
#include "aplab/rng.hpp"
#include "aplab/sparse.hpp"
#include "aplab/testing.hpp"
#include "aplab/verify.hpp"
#include "aplab/weight.hpp"

namespace {

using namespace aplab;

/// Bad command-line input (exit 1), as opposed to a numeric or validation
/// failure raised by the computation itself (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- small output helpers ----------------------------------------------------

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string jstr(const std::string& s) { return "\"" + json_escape(s) + "\""; }

std::string jinterval(Interval r) {
  return "{\"start_cell\":" + std::to_string(r.start_cell) +
         ",\"end_cell\":" + std::to_string(r.end_cell) + "}";
}

/// Resolved configuration, echoed into every output for reproducibility.
class ConfigEcho {
 public:
  void str(const std::string& key, const std::string& value) {
    rows_.push_back({key, value, jstr(value)});
  }
  void num(const std::string& key, double value) {
    rows_.push_back({key, fmt_g(value, 17), fmt_g(value, 17)});
  }
  void integer(const std::string& key, std::int64_t value) {
    rows_.push_back({key, std::to_string(value), std::to_string(value)});
  }
  void boolean(const std::string& key, bool value) {
    rows_.push_back({key, value ? "true" : "false", value ? "true" : "false"});
  }
  /// Reserve a row whose value is only known later (e.g. after a computation
  /// decides which pair mode was used), keeping the echo's field order stable.
  std::size_t placeholder_str(const std::string& key) {
    rows_.push_back({key, "", jstr("")});
    return rows_.size() - 1;
  }
  void fill_str(std::size_t slot, const std::string& value) {
    rows_[slot].plain = value;
    rows_[slot].json = jstr(value);
  }

  std::string table() const {
    std::string out;
    for (const Row& r : rows_) out += r.key + " = " + r.plain + "\n";
    return out;
  }
  std::string csv_comments() const {
    std::string out;
    for (const Row& r : rows_) out += "# " + r.key + " = " + r.plain + "\n";
    return out;
  }
  std::string json_object() const {
    std::string out = "{";
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i) out += ",";
      out += jstr(rows_[i].key) + ":" + rows_[i].json;
    }
    return out + "}";
  }

 private:
  struct Row {
    std::string key, plain, json;
  };
  std::vector<Row> rows_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw UsageError("cannot write file: " + out_path);
  f << text;
}

// --- argument parsing ----------------------------------------------------------

double parse_num(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw UsageError(what + ": cannot parse number '" + s + "'");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw UsageError(what + ": cannot parse integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

std::map<std::string, std::string> parse_kv(const std::string& s, const std::string& what) {
  std::map<std::string, std::string> kv;
  if (s.empty()) return kv;
  for (const std::string& item : split(s, ',')) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError(what + ": expected key=value, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

double kv_num(const std::map<std::string, std::string>& kv, const std::string& key,
              std::optional<double> fallback, const std::string& what) {
  const auto it = kv.find(key);
  if (it == kv.end()) {
    if (fallback) return *fallback;
    throw UsageError(what + ": missing '" + key + "='");
  }
  return parse_num(it->second, what);
}

std::pair<double, double> parse_domain(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw UsageError("--domain expects 'a,b'");
  const double a = parse_num(parts[0], "--domain");
  const double b = parse_num(parts[1], "--domain");
  if (!(a < b)) throw UsageError("--domain needs a < b");
  return {a, b};
}

int levels_from_cells(std::int64_t cells) {
  if (cells < 2 || cells > (std::int64_t{1} << 24) ||
      !std::has_single_bit(static_cast<std::uint64_t>(cells)))
    throw UsageError("--cells must be a power of two in [2, 2^24]");
  return std::countr_zero(static_cast<std::uint64_t>(cells));
}

std::vector<int> parse_delta_exps(const std::string& s) {
  std::vector<int> out;
  const std::size_t dots = s.find("..");
  if (dots != std::string::npos) {
    const std::int64_t a = parse_int(s.substr(0, dots), "--delta-exps");
    const std::int64_t b = parse_int(s.substr(dots + 2), "--delta-exps");
    if (a > b) throw UsageError("--delta-exps range must be ascending");
    for (std::int64_t k = a; k <= b; ++k) out.push_back(static_cast<int>(k));
  } else {
    for (const std::string& part : split(s, ','))
      out.push_back(static_cast<int>(parse_int(part, "--delta-exps")));
  }
  for (int k : out)
    if (k < 1 || k > 40) throw UsageError("--delta-exps entries must lie in [1, 40]");
  if (out.empty()) throw UsageError("--delta-exps is empty");
  return out;
}

// --- weight and function sources ------------------------------------------------

/// A weight resolved from its command-line description. Closed-form sources
/// keep their model so dual weights stay exact; sampled sources are taken as
/// piecewise constant.
struct WeightSource {
  Weight weight;
  std::optional<WeightModel> model;
};

WeightSource resolve_weight(const std::string& spec, double lo, double hi, std::int64_t cells) {
  const std::size_t colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const int levels = levels_from_cells(cells);
  const Mesh mesh(lo, (hi - lo) * std::ldexp(1.0, -levels), levels);

  if (head == "uniform") {
    const auto kv = parse_kv(rest, "--weight uniform");
    WeightModel m;
    m.background = kv_num(kv, "c", 1.0, "--weight uniform");
    return {Weight::from_model(mesh, m), m};
  }
  if (head == "power") {
    const auto kv = parse_kv(rest, "--weight power");
    WeightModel m;
    m.pieces.push_back(PowerPiece{kv_num(kv, "gamma", std::nullopt, "--weight power"),
                                  kv_num(kv, "s", 0.0, "--weight power"), mesh.whole()});
    return {Weight::from_model(mesh, m), m};
  }
  if (head == "avgs") {
    std::vector<double> v;
    for (const std::string& part : split(rest, ','))
      v.push_back(parse_num(part, "--weight avgs"));
    if (static_cast<std::int64_t>(v.size()) != cells)
      throw UsageError("--weight avgs: got " + std::to_string(v.size()) + " values for " +
                       std::to_string(cells) + " cells");
    return {Weight::from_cell_averages(mesh, v), std::nullopt};
  }
  if (head == "csv") return {weight_from_csv(mesh, read_file(rest)), std::nullopt};
  if (head == "json") return {weight_from_json(read_file(rest)), std::nullopt};
  throw UsageError("unknown weight spec '" + spec +
                   "' (use uniform:c=, power:gamma=,s=, avgs:v1,v2,..., csv:path, json:path)");
}

WeightPair make_pair_from(const WeightSource& src, double p) {
  if (src.model) {
    try {
      return WeightPair::analytic(src.weight.mesh(), *src.model, p);
    } catch (const std::invalid_argument&) {
      // The closed-form dual is not integrable on the mesh (a power piece
      // whose dual exponent drops to -1 or below). The sampled pair below is
      // the finite piecewise-constant reading of the same weight; any error
      // unrelated to the model recurs there and still surfaces.
    }
  }
  return WeightPair::discrete(src.weight, p);
}

CellFunction function_from(const WeightSource& src) {
  const auto a = src.weight.averages();
  return CellFunction{src.weight.mesh(), std::vector<double>(a.begin(), a.end())};
}

/// Function data parsed with the --weight grammar but without a weight's
/// positivity requirement: zeros (and negative samples) are legitimate
/// operator inputs, and each operator enforces its own preconditions.
CellFunction resolve_function(const std::string& spec, double lo, double hi,
                              std::int64_t cells) {
  const std::size_t colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const int levels = levels_from_cells(cells);
  const Mesh mesh(lo, (hi - lo) * std::ldexp(1.0, -levels), levels);

  const auto finish = [&](std::vector<double> v, const char* what) {
    if (static_cast<std::int64_t>(v.size()) != cells)
      throw UsageError(std::string(what) + ": got " + std::to_string(v.size()) +
                       " values for " + std::to_string(cells) + " cells");
    for (double x : v)
      if (!std::isfinite(x)) throw UsageError(std::string(what) + ": values must be finite");
    return CellFunction{mesh, std::move(v)};
  };

  if (head == "uniform") {
    const auto kv = parse_kv(rest, "--f uniform");
    const double cval = kv_num(kv, "c", 1.0, "--f uniform");
    return finish(std::vector<double>(static_cast<std::size_t>(cells), cval), "--f uniform");
  }
  if (head == "avgs") {
    std::vector<double> v;
    for (const std::string& part : split(rest, ','))
      v.push_back(parse_num(part, "--f avgs"));
    return finish(std::move(v), "--f avgs");
  }
  if (head == "csv") {
    std::istringstream in(read_file(rest));
    std::string line;
    std::vector<double> v;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (first) {  // header row
        first = false;
        continue;
      }
      const auto parts = split(line, ',');
      if (parts.size() != 2) throw UsageError("--f csv: expected 'cell_index,average' rows");
      v.push_back(parse_num(parts[1], "--f csv"));
    }
    return finish(std::move(v), "--f csv");
  }
  if (head == "power" || head == "json")
    return function_from(resolve_weight(spec, lo, hi, cells));
  throw UsageError("unknown function spec '" + spec +
                   "' (use uniform:c=, power:gamma=,s=, avgs:v1,v2,..., csv:path, json:path)");
}

SparseFamily family_from_flag(const std::string& spec, const Mesh& mesh) {
  const std::size_t colon = spec.find(':');
  if (spec.substr(0, colon) != "json" || colon == std::string::npos)
    throw UsageError("--family expects json:<path>");
  return sparse_from_json(mesh, read_file(spec.substr(colon + 1)));
}

SupScope parse_scope(const std::string& s) {
  if (s == "all") return SupScope::AllIntervals;
  if (s == "dyadic") return SupScope::Dyadic;
  throw UsageError("--scope must be 'all' or 'dyadic'");
}

std::string scope_name(SupScope s) { return s == SupScope::Dyadic ? "dyadic" : "all"; }

// --- shared option bundles -------------------------------------------------------

struct MeshOpts {
  std::string weight = "uniform:c=1";
  std::string domain = "0,1";
  std::int64_t cells = 1024;
  double p = 2.0;
};

void add_mesh_opts(CLI::App* cmd, MeshOpts& o) {
  cmd->add_option("--weight", o.weight,
                  "weight description: uniform:c=, power:gamma=,s=, avgs:v1,v2,..., "
                  "csv:path, json:path")
      ->capture_default_str();
  cmd->add_option("--domain", o.domain, "mesh endpoints a,b")->capture_default_str();
  cmd->add_option("--cells", o.cells, "number of mesh cells (power of two)")
      ->capture_default_str();
  cmd->add_option("--p", o.p, "Lebesgue exponent p in (1, inf)")->capture_default_str();
}

struct IoOpts {
  std::string format;
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
};

void add_io_opts(CLI::App* cmd, IoOpts& o, const std::string& default_format) {
  o.format = default_format;
  cmd->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", o.out, "write output to this file instead of stdout");
  cmd->add_option("--threads", o.threads, "worker threads (0 = automatic)")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "seed for all randomness")->capture_default_str();
}

void apply_threads(const IoOpts& io) {
  if (io.threads > 0) set_thread_count(io.threads);
}

void echo_io(ConfigEcho& cfg, const IoOpts& io) {
  cfg.str("threads", io.threads > 0 ? std::to_string(io.threads) : "auto");
}

void echo_mesh(ConfigEcho& cfg, const MeshOpts& mo) {
  cfg.str("weight", mo.weight);
  cfg.str("domain", mo.domain);
  cfg.integer("cells", mo.cells);
  cfg.num("p", mo.p);
}

// --- constants -------------------------------------------------------------------

struct ConstantsOpts {
  MeshOpts mesh;
  IoOpts io;
  std::string kind;
  std::string bound;
  std::string scope;
  double r = 0.0;
  double q = 0.0;
  bool has_r = false, has_q = false;
};

int run_constants(const ConstantsOpts& o) {
  if (o.kind.empty() == o.bound.empty())
    throw UsageError("constants needs exactly one of --kind or --bound");
  const auto [lo, hi] = parse_domain(o.mesh.domain);
  const WeightSource src = resolve_weight(o.mesh.weight, lo, hi, o.mesh.cells);
  WeightPair pair = make_pair_from(src, o.mesh.p);

  // Quantities taken at a second exponent (ar, mixed-pr, mixed-pq) may need a
  // dual the closed form cannot express (its exponent falls to -1 or below).
  // Retry once on the sampled pair, where pointwise powers always exist.
  const auto compute = [&](auto&& fn) {
    try {
      return fn(std::as_const(pair));
    } catch (const std::invalid_argument&) {
      if (pair.mode() != PairMode::Analytic) throw;
      pair = WeightPair::discrete(src.weight, o.mesh.p);
      return fn(std::as_const(pair));
    }
  };

  ConfigEcho cfg;
  cfg.str("command", "constants");
  echo_io(cfg, o.io);
  echo_mesh(cfg, o.mesh);
  const std::size_t pair_mode_slot = cfg.placeholder_str("pair_mode");

  std::string body_table, body_csv, body_json;
  if (!o.kind.empty()) {
    FlavorSpec spec = FlavorSpec::ap();
    if (o.kind == "ap") {
      spec = FlavorSpec::ap();
    } else if (o.kind == "ar") {
      if (!o.has_r) throw UsageError("--kind ar needs --r");
      spec = FlavorSpec::ar(o.r);
    } else if (o.kind == "a1") {
      spec = FlavorSpec::a1();
    } else if (o.kind == "ainf-exp") {
      spec = FlavorSpec::ainf_exp();
    } else if (o.kind == "ainf-fw") {
      spec = FlavorSpec::ainf_fw();
    } else {
      throw UsageError("--kind must be one of ap, ar, a1, ainf-exp, ainf-fw");
    }
    cfg.str("kind", o.kind);
    if (o.has_r) cfg.num("r", o.r);
    const SupScope scope = o.scope.empty() ? default_scope(spec) : parse_scope(o.scope);
    cfg.str("scope", scope_name(scope));
    const SupremumResult res =
        compute([&](const WeightPair& pr) { return global_sup(pr, spec, scope); });
    body_table = "value = " + fmt_g(res.value, 12) + "\nargmax = [" +
                 std::to_string(res.argmax.start_cell) + ", " +
                 std::to_string(res.argmax.end_cell) + ")\nscope = " + scope_name(res.scope) +
                 "\n";
    body_csv = "value,argmax_start,argmax_end,scope\n" + fmt_g(res.value, 12) + "," +
               std::to_string(res.argmax.start_cell) + "," +
               std::to_string(res.argmax.end_cell) + "," + scope_name(res.scope) + "\n";
    body_json = "\"value\":" + fmt_g(res.value, 17) + ",\"argmax\":" + jinterval(res.argmax) +
                ",\"scope\":" + jstr(scope_name(res.scope));
  } else {
    const std::optional<BoundId> id = bound_from_name(o.bound);
    if (!id) throw UsageError("unknown bound id '" + o.bound + "'");
    std::optional<double> param;
    if (bound_needs_param(*id)) {
      if (*id == BoundId::MixedPr) {
        if (!o.has_r) throw UsageError("bound 'mixed-pr' needs --r");
        param = o.r;
      } else {
        if (!o.has_q) throw UsageError("bound 'mixed-pq' needs --q");
        param = o.q;
      }
    }
    cfg.str("bound", o.bound);
    if (param) cfg.num(*id == BoundId::MixedPr ? "r" : "q", *param);
    const double v = compute([&](const WeightPair& pr) { return bound_value(pr, *id, param); });
    body_table = "value = " + fmt_g(v, 12) + "\n";
    body_csv = "value\n" + fmt_g(v, 12) + "\n";
    body_json = "\"value\":" + fmt_g(v, 17);
  }

  cfg.fill_str(pair_mode_slot,
               pair.mode() == PairMode::Analytic ? "analytic" : "discrete");
  if (o.io.format == "json")
    write_output("{\"config\":" + cfg.json_object() + "," + body_json + "}\n", o.io.out);
  else if (o.io.format == "csv")
    write_output(cfg.csv_comments() + body_csv, o.io.out);
  else
    write_output(cfg.table() + body_table, o.io.out);
  return 0;
}

// --- operators ---------------------------------------------------------------------

struct OperatorsOpts {
  MeshOpts mesh;  // --weight doubles as the weight for the weighted maximal
  IoOpts io;
  std::string op = "dyadic";
  std::string f = "uniform:c=1";
  std::string scope = "all";
  double tau = 4.0;
};

int run_operators(const OperatorsOpts& o) {
  const auto [lo, hi] = parse_domain(o.mesh.domain);
  const CellFunction f = resolve_function(o.f, lo, hi, o.mesh.cells);

  ConfigEcho cfg;
  cfg.str("command", "operators");
  echo_io(cfg, o.io);
  cfg.str("op", o.op);
  cfg.str("f", o.f);
  cfg.str("domain", o.mesh.domain);
  cfg.integer("cells", o.mesh.cells);

  CellFunction result{f.mesh, {}};
  if (o.op == "maximal") {
    result = maximal_mesh(f);
  } else if (o.op == "dyadic") {
    result = dyadic_maximal(f);
  } else if (o.op == "weighted") {
    cfg.str("weight", o.mesh.weight);
    const WeightSource wsrc = resolve_weight(o.mesh.weight, lo, hi, o.mesh.cells);
    result = weighted_dyadic_maximal(f, wsrc.weight);
  } else if (o.op == "geometric") {
    cfg.str("scope", o.scope);
    result = geometric_maximal(f, parse_scope(o.scope));
  } else if (o.op == "sparse-m" || o.op == "sparse-t") {
    cfg.num("tau", o.tau);
    const SparseFamily S = build_sparse(f, o.tau, f.mesh.top_cube());
    result = o.op == "sparse-m" ? sparse_M(S, f) : sparse_T(S, f);
  } else {
    throw UsageError(
        "--op must be one of maximal, dyadic, weighted, geometric, sparse-m, sparse-t");
  }

  if (o.io.format == "json") {
    std::string vals;
    for (std::size_t i = 0; i < result.values.size(); ++i) {
      if (i) vals += ",";
      vals += fmt_g(result.values[i], 17);
    }
    write_output("{\"config\":" + cfg.json_object() + ",\"values\":[" + vals + "]}\n", o.io.out);
  } else if (o.io.format == "csv") {
    std::string body = cfg.csv_comments() + "cell_index,value\n";
    for (std::size_t i = 0; i < result.values.size(); ++i)
      body += std::to_string(i) + "," + fmt_g(result.values[i], 12) + "\n";
    write_output(body, o.io.out);
  } else {
    std::string body = cfg.table();
    for (std::size_t i = 0; i < result.values.size(); ++i)
      body += std::to_string(i) + "  " + fmt_g(result.values[i], 12) + "\n";
    write_output(body, o.io.out);
  }
  return 0;
}

// --- sparse -----------------------------------------------------------------------

struct SparseOpts {
  MeshOpts mesh;
  IoOpts io;
  std::string f = "uniform:c=1";
  double tau = 4.0;
};

int run_sparse(const SparseOpts& o) {
  const auto [lo, hi] = parse_domain(o.mesh.domain);
  const CellFunction f = resolve_function(o.f, lo, hi, o.mesh.cells);
  const SparseFamily S = build_sparse(f, o.tau, f.mesh.top_cube());

  ConfigEcho cfg;
  cfg.str("command", "sparse");
  echo_io(cfg, o.io);
  cfg.str("f", o.f);
  cfg.str("domain", o.mesh.domain);
  cfg.integer("cells", o.mesh.cells);
  cfg.num("tau", o.tau);

  if (o.io.format == "json") {
    write_output("{\"config\":" + cfg.json_object() +
                     ",\"members\":" + std::to_string(S.size()) +
                     ",\"cubes\":" + sparse_to_json(S) + "}\n",
                 o.io.out);
  } else if (o.io.format == "csv") {
    std::string body = cfg.csv_comments() + "level,offset,start_cell,end_cell,exclusive_cells\n";
    for (std::size_t i = 0; i < S.size(); ++i) {
      const Interval r = S.mesh().cells(S.cube(i));
      body += std::to_string(S.cube(i).level) + "," + std::to_string(S.cube(i).offset) + "," +
              std::to_string(r.start_cell) + "," + std::to_string(r.end_cell) + "," +
              std::to_string(S.exclusive_size(i)) + "\n";
    }
    write_output(body, o.io.out);
  } else {
    std::string body = cfg.table() + "members = " + std::to_string(S.size()) + "\n";
    for (std::size_t i = 0; i < S.size(); ++i) {
      const Interval r = S.mesh().cells(S.cube(i));
      body += "cube level=" + std::to_string(S.cube(i).level) +
              " offset=" + std::to_string(S.cube(i).offset) + " cells=[" +
              std::to_string(r.start_cell) + ", " + std::to_string(r.end_cell) +
              ") exclusive=" + std::to_string(S.exclusive_size(i)) + "\n";
    }
    write_output(body, o.io.out);
  }
  return 0;
}

// --- corona -----------------------------------------------------------------------

struct CoronaOpts {
  MeshOpts mesh;
  IoOpts io;
  std::string family = "random";
  double r = 2.0;
};

int run_corona(const CoronaOpts& o) {
  const auto [lo, hi] = parse_domain(o.mesh.domain);
  const int levels = levels_from_cells(o.mesh.cells);
  const Mesh mesh(lo, (hi - lo) * std::ldexp(1.0, -levels), levels);

  ConfigEcho cfg;
  cfg.str("command", "corona");
  echo_io(cfg, o.io);
  cfg.str("family", o.family);
  cfg.str("domain", o.mesh.domain);
  cfg.integer("cells", o.mesh.cells);
  cfg.num("r", o.r);
  cfg.num("p", o.mesh.p);

  std::optional<WeightedFamily> fam;
  std::string strata_json, strata_table;
  if (o.family == "random") {
    cfg.integer("seed", static_cast<std::int64_t>(o.io.seed));
    Rng rng(o.io.seed);
    fam.emplace(random_weighted_family(mesh, rng, o.r));
  } else {
    cfg.str("weight", o.mesh.weight);
    const WeightSource src = resolve_weight(o.mesh.weight, lo, hi, o.mesh.cells);
    const WeightPair pair = make_pair_from(src, o.mesh.p);
    cfg.str("pair_mode", pair.mode() == PairMode::Analytic ? "analytic" : "discrete");
    const SparseFamily S = family_from_flag(o.family, pair.mesh());
    std::vector<double> scores;
    scores.reserve(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) scores.push_back(ap_local(pair, S.cube(i)));
    fam.emplace(WeightedFamily::measured(S, std::move(scores), pair.sigma(), o.r));
    const ApStratification strat = stratify_ap(fam->family(), pair);
    strata_json = ",\"strata\":{\"min_bucket\":" + std::to_string(strat.min_bucket) +
                  ",\"max_bucket\":" + std::to_string(strat.max_bucket) +
                  ",\"cap\":" + std::to_string(strat.cap) + "}";
    strata_table = "strata buckets = [" + std::to_string(strat.min_bucket) + ", " +
                   std::to_string(strat.max_bucket) + "], cap = " + std::to_string(strat.cap) +
                   "\n";
  }

  const CoronaResult res = corona_decompose(*fam);
  const CoronaBoundCheck bound = verify_corona_bound(*fam, res, o.mesh.p);

  std::string gen_sizes_json = "[", gen_sizes_plain;
  for (std::size_t g = 0; g < res.generations.size(); ++g) {
    if (g) {
      gen_sizes_json += ",";
      gen_sizes_plain += " ";
    }
    gen_sizes_json += std::to_string(res.generations[g].size());
    gen_sizes_plain += std::to_string(res.generations[g].size());
  }
  gen_sizes_json += "]";

  if (o.io.format == "json") {
    write_output("{\"config\":" + cfg.json_object() +
                     ",\"members\":" + std::to_string(fam->size()) +
                     ",\"generation_sizes\":" + gen_sizes_json +
                     ",\"bound\":{\"lhs\":" + fmt_g(bound.lhs, 17) +
                     ",\"rhs\":" + fmt_g(bound.rhs, 17) + ",\"ratio\":" + fmt_g(bound.ratio, 17) +
                     "}" + strata_json + ",\"corona\":" + corona_to_json(*fam, res) + "}\n",
                 o.io.out);
  } else if (o.io.format == "csv") {
    std::string body =
        cfg.csv_comments() + "member,level,offset,score,stopping,stop_parent,ratio_class\n";
    for (std::size_t i = 0; i < fam->size(); ++i) {
      const Cube q = fam->family().cube(i);
      body += std::to_string(i) + "," + std::to_string(q.level) + "," +
              std::to_string(q.offset) + "," + fmt_g(fam->score(i), 12) + "," +
              (res.stopping[i] ? "1" : "0") + "," + std::to_string(res.stop_parent[i]) + "," +
              std::to_string(res.ratio_class[i]) + "\n";
    }
    write_output(body, o.io.out);
  } else {
    std::string body = cfg.table();
    body += "members = " + std::to_string(fam->size()) + "\n";
    body += "generation sizes = " + gen_sizes_plain + "\n";
    body += "balance c = " + fmt_g(fam->balance_c(), 12) +
            ", C = " + fmt_g(fam->balance_C(), 12) + "\n";
    body += "bound lhs = " + fmt_g(bound.lhs, 12) + ", rhs = " + fmt_g(bound.rhs, 12) +
            ", ratio = " + fmt_g(bound.ratio, 12) + "\n";
    body += strata_table;
    write_output(body, o.io.out);
  }
  return 0;
}

// --- testing ----------------------------------------------------------------------

struct TestingOpts {
  MeshOpts mesh;
  IoOpts io;
  std::string family = "from-weight";
  double tau = 4.0;
  int restarts = 16;
  bool power_only = false;
};

int run_testing(const TestingOpts& o) {
  const auto [lo, hi] = parse_domain(o.mesh.domain);
  const WeightSource src = resolve_weight(o.mesh.weight, lo, hi, o.mesh.cells);
  const WeightPair pair = make_pair_from(src, o.mesh.p);
  const char* pair_mode = pair.mode() == PairMode::Analytic ? "analytic" : "discrete";

  SparseFamily S = o.family == "from-weight"
                       ? build_sparse(function_from(src), o.tau, pair.mesh().top_cube())
                       : family_from_flag(o.family, pair.mesh());

  ConfigEcho cfg;
  cfg.str("command", "testing");
  echo_io(cfg, o.io);
  echo_mesh(cfg, o.mesh);
  cfg.str("pair_mode", pair_mode);
  cfg.str("family", o.family);
  cfg.num("tau", o.tau);
  cfg.integer("restarts", o.restarts);
  cfg.boolean("power_only", o.power_only);
  cfg.integer("seed", static_cast<std::int64_t>(o.io.seed));

  const SupremumResult fwd = testing_T(S, pair, TestingDirection::Forward);
  const SupremumResult dual = testing_T(S, pair, TestingDirection::Dual);
  const SupremumResult tmax = testing_M(pair, pair.p());
  const NormMethod method =
      o.power_only ? NormMethod::power() : NormMethod::restarts(o.restarts);
  const NormEstimate est = norm_estimate(S, pair, method, o.io.seed);

  if (o.io.format == "json") {
    auto sup_json = [](const SupremumResult& r) {
      return "{\"value\":" + fmt_g(r.value, 17) + ",\"argmax\":" + jinterval(r.argmax) + "}";
    };
    write_output("{\"config\":" + cfg.json_object() + ",\"members\":" +
                     std::to_string(S.size()) + ",\"testing_fwd\":" + sup_json(fwd) +
                     ",\"testing_dual\":" + sup_json(dual) + ",\"testing_m\":" + sup_json(tmax) +
                     ",\"norm\":{\"lower_bound\":" + fmt_g(est.lower_bound, 17) +
                     ",\"iterations\":" + std::to_string(est.iterations) +
                     ",\"converged\":" + (est.converged ? "true" : "false") + "}}\n",
                 o.io.out);
  } else if (o.io.format == "csv") {
    write_output(cfg.csv_comments() + "quantity,value\n" +
                     "testing_fwd," + fmt_g(fwd.value, 12) + "\n" +
                     "testing_dual," + fmt_g(dual.value, 12) + "\n" +
                     "testing_m," + fmt_g(tmax.value, 12) + "\n" +
                     "norm_lower_bound," + fmt_g(est.lower_bound, 12) + "\n" +
                     "iterations," + std::to_string(est.iterations) + "\n" +
                     "converged," + (est.converged ? std::string("1") : std::string("0")) + "\n",
                 o.io.out);
  } else {
    auto line = [](const char* name, const SupremumResult& r) {
      return std::string(name) + " = " + fmt_g(r.value, 12) + " at [" +
             std::to_string(r.argmax.start_cell) + ", " + std::to_string(r.argmax.end_cell) +
             ")\n";
    };
    write_output(cfg.table() + "members = " + std::to_string(S.size()) + "\n" +
                     line("testing fwd", fwd) + line("testing dual", dual) +
                     line("testing maximal", tmax) +
                     "norm lower bound = " + fmt_g(est.lower_bound, 12) +
                     " (iterations = " + std::to_string(est.iterations) +
                     ", converged = " + (est.converged ? "yes" : "no") + ")\n",
                 o.io.out);
  }
  return 0;
}

// --- sweep ------------------------------------------------------------------------

struct SweepOpts {
  IoOpts io;
  std::string example = "wdelta";
  std::string delta_exps = "4..12";
  double p = 0.0;
  double alpha = 0.0;
  std::int64_t cells = 0;
  double tau = 4.0;
  bool has_p = false, has_alpha = false, has_cells = false, has_format = false;
};

int run_sweep_cmd(const SweepOpts& o) {
  const bool observation = o.example == "observation";
  if (!observation && o.example != "wdelta")
    throw UsageError("--example must be 'wdelta' or 'observation'");

  SweepConfig cfg;
  cfg.p = o.has_p ? o.p : (observation ? 2.0 : 3.0);
  cfg.alpha = o.has_alpha ? o.alpha : (observation ? 0.5 : 0.4);
  const std::int64_t cells = o.has_cells ? o.cells : (observation ? 4096 : 16384);
  cfg.levels = levels_from_cells(cells);
  cfg.tau = o.tau;
  cfg.seed = o.io.seed;
  for (int k : parse_delta_exps(o.delta_exps)) cfg.deltas.push_back(std::ldexp(1.0, -k));

  const SweepReport report = observation ? run_observation_sweep(cfg) : run_sweep(cfg);

  std::string format = o.io.format;
  if (!o.has_format)
    format = o.io.out.size() >= 5 && o.io.out.substr(o.io.out.size() - 5) == ".json" ? "json"
                                                                                     : "csv";

  std::string artifact;
  if (format == "json") {
    artifact = sweep_to_json(report);
  } else if (format == "csv") {
    artifact = sweep_to_csv(report);
  } else {
    ConfigEcho echo;
    echo.str("command", "sweep");
    echo_io(echo, o.io);
    echo.str("example", o.example);
    echo.num("p", cfg.p);
    echo.num("alpha", cfg.alpha);
    echo.integer("cells", cells);
    echo.num("tau", cfg.tau);
    echo.integer("seed", static_cast<std::int64_t>(cfg.seed));
    artifact = echo.table();
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const SweepRow& row = report.rows[i];
      artifact += "delta = " + fmt_g(row.delta, 12) + (row.converged ? "" : "  [not converged]") +
                  "\n";
      for (std::size_t c = 0; c < report.columns.size(); ++c)
        artifact += "  " + report.columns[c] + " = " + fmt_g(row.values[c], 12) + "\n";
    }
    for (const auto& [name, fit] : report.slopes)
      artifact += "slope " + name + " = " + fmt_g(fit.slope, 6) + " (r2 = " + fmt_g(fit.r2, 6) +
                  ")\n";
  }

  write_output(artifact, o.io.out);
  if (!o.io.out.empty()) {
    // Summary on stdout; the file holds the schema-exact artifact.
    std::string summary = "wrote " + o.io.out + " (" + format + ")\n";
    std::size_t ok = 0;
    for (const SweepRow& row : report.rows) ok += row.converged ? 1 : 0;
    summary += "rows = " + std::to_string(report.rows.size()) + " (" + std::to_string(ok) +
               " converged)\n";
    for (const auto& [name, fit] : report.slopes)
      summary +=
          "slope " + name + " = " + fmt_g(fit.slope, 6) + " (r2 = " + fmt_g(fit.r2, 6) + ")\n";
    std::cout << summary;
  }
  if (!report.all_converged) {
    std::cerr << "mesh-convergence guard: at least one row changed by 1% or more when the "
                 "cell count doubled (rows flagged in the output)\n";
    return 2;
  }
  return 0;
}

// --- verify -----------------------------------------------------------------------

struct VerifyOpts {
  IoOpts io;
  std::string suites = "all";
};

int run_verify(const VerifyOpts& o) {
  std::vector<std::string> names;
  if (o.suites == "all") {
    names = all_suite_names();
  } else {
    names = split(o.suites, ',');
    for (const std::string& n : names) {
      const auto& all = all_suite_names();
      if (std::find(all.begin(), all.end(), n) == all.end())
        throw UsageError("unknown suite '" + n + "'");
    }
  }

  ConfigEcho cfg;
  cfg.str("command", "verify");
  echo_io(cfg, o.io);
  std::string joined;
  for (std::size_t i = 0; i < names.size(); ++i) joined += (i ? "," : "") + names[i];
  cfg.str("suites", joined);
  cfg.integer("seed", static_cast<std::int64_t>(o.io.seed));

  std::vector<SuiteResult> results;
  for (const std::string& n : names) {
    std::cerr << "running suite " << n << " ...\n";
    results.push_back(run_suite(n, o.io.seed));
  }
  bool all_passed = true;
  for (const SuiteResult& r : results) all_passed = all_passed && r.passed;

  if (o.io.format == "json") {
    std::string suites;
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (i) suites += ",";
      std::string lines;
      for (std::size_t j = 0; j < results[i].lines.size(); ++j)
        lines += (j ? "," : "") + jstr(results[i].lines[j]);
      suites += "{\"name\":" + jstr(results[i].name) +
                ",\"passed\":" + (results[i].passed ? "true" : "false") + ",\"lines\":[" + lines +
                "]}";
    }
    write_output("{\"config\":" + cfg.json_object() + ",\"suites\":[" + suites +
                     "],\"passed\":" + (all_passed ? "true" : "false") + "}\n",
                 o.io.out);
  } else {
    write_output(cfg.table() + suite_report(results), o.io.out);
  }
  return all_passed ? 0 : 2;
}

// --- report -----------------------------------------------------------------------

struct ReportOpts {
  MeshOpts mesh;
  IoOpts io;
  double r = 0.0;
  double q = 0.0;
  bool has_r = false, has_q = false;
  double tau = 4.0;
  int restarts = 16;
};

int run_report(const ReportOpts& o) {
  const auto [lo, hi] = parse_domain(o.mesh.domain);
  const WeightSource src = resolve_weight(o.mesh.weight, lo, hi, o.mesh.cells);
  WeightPair pair = make_pair_from(src, o.mesh.p);

  const auto make_rows = [&](const WeightPair& pr) {
    std::vector<std::pair<std::string, double>> rows;
    rows.push_back({"ap", global_sup(pr, FlavorSpec::ap()).value});
    rows.push_back({"ainf_fw_w", global_fw_sup(pr.w()).value});
    rows.push_back({"ainf_fw_sigma", global_fw_sup(pr.sigma()).value});
    for (BoundId id : all_bounds()) {
      if (!bound_needs_param(id)) {
        rows.push_back({std::string(bound_name(id)), bound_value(pr, id)});
      } else if (id == BoundId::MixedPr && o.has_r) {
        rows.push_back({std::string(bound_name(id)), bound_value(pr, id, o.r)});
      } else if (id == BoundId::MixedPq && o.has_q) {
        rows.push_back({std::string(bound_name(id)), bound_value(pr, id, o.q)});
      }
    }
    const SparseFamily S = build_sparse(function_from(src), o.tau, pr.mesh().top_cube());
    rows.push_back({"testing_fwd", testing_T(S, pr, TestingDirection::Forward).value});
    rows.push_back({"testing_dual", testing_T(S, pr, TestingDirection::Dual).value});
    rows.push_back({"testing_m", testing_M(pr, pr.p()).value});
    rows.push_back(
        {"norm_lower_bound",
         norm_estimate(S, pr, NormMethod::restarts(o.restarts), o.io.seed).lower_bound});
    return rows;
  };

  // As in run_constants: a second-exponent row (mixed-pr / mixed-pq) may ask
  // the closed form for a dual it cannot express; retry on the sampled pair.
  std::vector<std::pair<std::string, double>> rows;
  try {
    rows = make_rows(pair);
  } catch (const std::invalid_argument&) {
    if (pair.mode() != PairMode::Analytic) throw;
    pair = WeightPair::discrete(src.weight, o.mesh.p);
    rows = make_rows(pair);
  }

  ConfigEcho cfg;
  cfg.str("command", "report");
  echo_io(cfg, o.io);
  echo_mesh(cfg, o.mesh);
  cfg.str("pair_mode", pair.mode() == PairMode::Analytic ? "analytic" : "discrete");
  cfg.num("tau", o.tau);
  cfg.integer("restarts", o.restarts);
  cfg.integer("seed", static_cast<std::int64_t>(o.io.seed));
  if (o.has_r) cfg.num("r", o.r);
  if (o.has_q) cfg.num("q", o.q);

  if (o.io.format == "json") {
    std::string body;
    for (const auto& [name, v] : rows) body += "," + jstr(name) + ":" + fmt_g(v, 17);
    write_output("{\"config\":" + cfg.json_object() + body + "}\n", o.io.out);
  } else if (o.io.format == "csv") {
    std::string body = cfg.csv_comments() + "quantity,value\n";
    for (const auto& [name, v] : rows) body += name + "," + fmt_g(v, 12) + "\n";
    write_output(body, o.io.out);
  } else {
    std::string body = cfg.table();
    for (const auto& [name, v] : rows) {
      std::string pad(name.size() < 16 ? 16 - name.size() : 1, ' ');
      body += name + pad + fmt_g(v, 12) + "\n";
    }
    write_output(body, o.io.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wnlab: numerical laboratory for weighted-norm inequalities on dyadic meshes"};
  app.require_subcommand(1);

  ConstantsOpts co;
  CLI::App* constants =
      app.add_subcommand("constants", "Evaluate a weight characteristic or a norm-bound value");
  add_mesh_opts(constants, co.mesh);
  add_io_opts(constants, co.io, "table");
  constants->add_option("--kind", co.kind,
                        "characteristic: ap, ar (needs --r), a1, ainf-exp, ainf-fw");
  constants->add_option("--bound", co.bound,
                        "norm-bound id: buckley, maxexp0, maxW, hl-mixed, mixed-pr, exp1, "
                        "exp0, w0, mixed-pq");
  constants->add_option("--scope", co.scope, "supremum scope: all intervals or dyadic cubes")
      ->check(CLI::IsMember({"all", "dyadic"}));
  constants->add_option("--r", co.r, "second exponent for ar / mixed-pr");
  constants->add_option("--q", co.q, "second exponent for mixed-pq");

  OperatorsOpts oo;
  CLI::App* operators =
      app.add_subcommand("operators", "Apply a maximal or sparse operator to a cell function");
  add_mesh_opts(operators, oo.mesh);
  add_io_opts(operators, oo.io, "csv");
  operators
      ->add_option("--op", oo.op,
                   "operator: maximal, dyadic, weighted, geometric, sparse-m, sparse-t")
      ->capture_default_str();
  operators->add_option("--f", oo.f, "input function (same description grammar as --weight)")
      ->capture_default_str();
  operators->add_option("--scope", oo.scope, "scope for the geometric operator")
      ->check(CLI::IsMember({"all", "dyadic"}))
      ->capture_default_str();
  operators->add_option("--tau", oo.tau, "stopping factor for sparse-m / sparse-t")
      ->capture_default_str();

  SparseOpts so;
  CLI::App* sparse =
      app.add_subcommand("sparse", "Build a stopping-time sparse family from a cell function");
  add_mesh_opts(sparse, so.mesh);
  add_io_opts(sparse, so.io, "table");
  sparse->add_option("--f", so.f, "input function (same description grammar as --weight)")
      ->capture_default_str();
  sparse->add_option("--tau", so.tau, "stopping factor (> 2)")->capture_default_str();

  CoronaOpts ko;
  CLI::App* corona = app.add_subcommand(
      "corona", "Corona-decompose a weighted cube family and check the summation bound");
  add_mesh_opts(corona, ko.mesh);
  add_io_opts(corona, ko.io, "table");
  corona->add_option("--family", ko.family, "'random' or json:<path> with cube list")
      ->capture_default_str();
  corona->add_option("--r", ko.r, "balance exponent of the weighted family")
      ->capture_default_str();

  TestingOpts to;
  CLI::App* testing = app.add_subcommand(
      "testing", "Testing constants and a certified norm lower bound for the sparse operator");
  add_mesh_opts(testing, to.mesh);
  add_io_opts(testing, to.io, "table");
  testing->add_option("--family", to.family, "'from-weight' or json:<path> with cube list")
      ->capture_default_str();
  testing->add_option("--tau", to.tau, "stopping factor when building from the weight")
      ->capture_default_str();
  testing->add_option("--restarts", to.restarts, "random ascent restarts")
      ->capture_default_str();
  testing->add_flag("--power-only", to.power_only,
                    "single ascent from the constant function, no restarts or witnesses");

  SweepOpts wo;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "Sweep a power-law example family over the singularity scale delta");
  add_io_opts(sweep, wo.io, "csv");
  wo.has_format = false;
  sweep->add_option("--example", wo.example, "example family: wdelta or observation")
      ->capture_default_str();
  sweep->add_option("--delta-exps", wo.delta_exps, "delta = 2^-k grid: 'a..b' or 'k1,k2,...'")
      ->capture_default_str();
  CLI::Option* sp = sweep->add_option("--p", wo.p, "exponent (default 3 wdelta, 2 observation)");
  CLI::Option* sa =
      sweep->add_option("--alpha", wo.alpha, "scale exponent (default 0.4 wdelta, 0.5 obs)");
  CLI::Option* sc =
      sweep->add_option("--cells", wo.cells, "mesh cells (default 16384 wdelta, 4096 obs)");
  sweep->add_option("--tau", wo.tau, "stopping factor for the testing columns")
      ->capture_default_str();

  VerifyOpts vo;
  CLI::App* verify = app.add_subcommand("verify", "Run the verification suites");
  add_io_opts(verify, vo.io, "table");
  verify
      ->add_option("--suite", vo.suites,
                   "comma-separated suite names or 'all': identity, duality, jensen, sparsity, "
                   "wnorm, corona, testing, bounds, slopes, observation, interp, determinism")
      ->capture_default_str();

  ReportOpts ro;
  CLI::App* report = app.add_subcommand(
      "report", "Characteristics, bound values, and testing constants for one weight");
  add_mesh_opts(report, ro.mesh);
  report->get_option("--cells")->default_val(std::int64_t{256});
  ro.mesh.cells = 256;
  add_io_opts(report, ro.io, "table");
  CLI::Option* rr = report->add_option("--r", ro.r, "include mixed-pr at this r");
  CLI::Option* rq = report->add_option("--q", ro.q, "include mixed-pq at this q");
  report->add_option("--tau", ro.tau, "stopping factor for the testing family")
      ->capture_default_str();
  report->add_option("--restarts", ro.restarts, "random ascent restarts")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  co.has_r = constants->count("--r") > 0;
  co.has_q = constants->count("--q") > 0;
  wo.has_p = sp->count() > 0;
  wo.has_alpha = sa->count() > 0;
  wo.has_cells = sc->count() > 0;
  wo.has_format = sweep->count("--format") > 0;
  ro.has_r = rr->count() > 0;
  ro.has_q = rq->count() > 0;

  try {
    if (constants->parsed()) {
      apply_threads(co.io);
      return run_constants(co);
    }
    if (operators->parsed()) {
      apply_threads(oo.io);
      return run_operators(oo);
    }
    if (sparse->parsed()) {
      apply_threads(so.io);
      return run_sparse(so);
    }
    if (corona->parsed()) {
      apply_threads(ko.io);
      return run_corona(ko);
    }
    if (testing->parsed()) {
      apply_threads(to.io);
      return run_testing(to);
    }
    if (sweep->parsed()) {
      apply_threads(wo.io);
      return run_sweep_cmd(wo);
    }
    if (verify->parsed()) {
      apply_threads(vo.io);
      return run_verify(vo);
    }
    if (report->parsed()) {
      apply_threads(ro.io);
      return run_report(ro);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
