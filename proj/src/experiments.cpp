#include "aplab/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "aplab/numfmt.hpp"
#include "aplab/parallel.hpp"
#include "aplab/rng.hpp"
#include "aplab/sparse.hpp"
#include "aplab/testing.hpp"

namespace aplab {

SlopeFit fit_slope(std::span<const double> deltas, std::span<const double> values) {
  if (deltas.size() != values.size())
    throw std::invalid_argument("slope fit needs one value per delta");
  const std::size_t n = deltas.size();
  if (n < 3) throw std::invalid_argument("slope fits need at least three points");
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(deltas[i] > 0.0) || !(deltas[i] < 1.0))
      throw std::invalid_argument("slope fits need deltas in (0, 1)");
    if (!(values[i] > 0.0)) throw std::invalid_argument("slope fits need positive values");
    xs[i] = -std::log(deltas[i]);
    ys[i] = std::log(values[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("slope fits need distinct deltas");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    double ssres = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
      ssres += r * r;
    }
    fit.r2 = 1.0 - ssres / syy;
  } else {
    fit.r2 = 1.0;  // constant data: the flat line explains everything
  }
  return fit;
}

std::vector<BoundId> default_sweep_bounds() {
  return {BoundId::Buckley, BoundId::MaxExp0, BoundId::MaxW, BoundId::HlMixed,
          BoundId::Exp1,    BoundId::Exp0,    BoundId::W0};
}

namespace {

/// Log-domain suprema over ALL intervals, one O(N^2) pass. Each entry is the
/// sup of the log of a per-interval quantity; exponentiating afterwards keeps
/// the inner loop down to two log() calls per interval.
struct ScanSups {
  double ap;        // log Ap(w)
  double apdual;    // log Ap'(sigma)
  double exp1;      // log [ Ap^{1/(p-1)} AinfExp^{1-1/(p-1)} ](w)
  double exp0w;     // log [ Ap^{1/p} AinfExp^{1/p'} ](w)
  double exp0s;     // log [ Ap'^{1/p'} AinfExp^{1/p} ](sigma)
  double obs;       // log [ Ap^{alpha} AinfExp^{1-alpha} ](w)
};

constexpr std::size_t kObjectives = 6;

ScanSups scan_all_intervals(const WeightPair& pair, double alpha) {
  const Mesh& mesh = pair.mesh();
  const cell_index n = mesh.num_cells();
  const Weight& w = pair.w();
  const Weight& sigma = pair.sigma();
  const std::size_t sz = static_cast<std::size_t>(n) + 1;
  std::vector<double> pw(sz), ps(sz), lw(sz), ls(sz), loglen(sz), invlen(sz);
  for (std::size_t i = 0; i < sz; ++i) {
    const auto c = static_cast<cell_index>(i);
    pw[i] = w.prefix_avg(c);
    ps[i] = sigma.prefix_avg(c);
    lw[i] = w.prefix_log(c);
    ls[i] = sigma.prefix_log(c);
    loglen[i] = i > 0 ? std::log(static_cast<double>(i)) : 0.0;
    invlen[i] = i > 0 ? 1.0 / static_cast<double>(i) : 0.0;
  }
  const double p = pair.p();
  const double pc = pair.p_conj();
  const double a1 = 1.0 / (p - 1.0);
  const double ip = 1.0 / p;
  const double ipc = 1.0 / pc;

  const double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<std::array<double, kObjectives>> locals(
      static_cast<std::size_t>(num_chunks(n)),
      {kNegInf, kNegInf, kNegInf, kNegInf, kNegInf, kNegInf});
  parallel_chunks(n, [&](int chunk, std::int64_t begin, std::int64_t end) {
    std::array<double, kObjectives>& best = locals[static_cast<std::size_t>(chunk)];
    for (std::int64_t s = begin; s < end; ++s) {
      const std::size_t su = static_cast<std::size_t>(s);
      const double pws = pw[su], pss = ps[su], lws = lw[su], lss0 = ls[su];
      for (std::size_t e = su + 1; e < sz; ++e) {
        const std::size_t len = e - su;
        const double lsw = std::log(pw[e] - pws);
        const double lss = std::log(ps[e] - pss);
        const double mlw = (lw[e] - lws) * invlen[len];
        const double mls = (ls[e] - lss0) * invlen[len];
        const double ll = loglen[len];
        const double ap = lsw + (p - 1.0) * lss - p * ll;
        const double apd = lss + (pc - 1.0) * lsw - pc * ll;
        const double aiw = lsw - ll - mlw;
        const double ais = lss - ll - mls;
        best[0] = std::max(best[0], ap);
        best[1] = std::max(best[1], apd);
        best[2] = std::max(best[2], a1 * ap + (1.0 - a1) * aiw);
        best[3] = std::max(best[3], ip * ap + ipc * aiw);
        best[4] = std::max(best[4], ipc * apd + ip * ais);
        best[5] = std::max(best[5], alpha * ap + (1.0 - alpha) * aiw);
      }
    }
  });
  std::array<double, kObjectives> merged = locals[0];
  for (std::size_t c = 1; c < locals.size(); ++c)
    for (std::size_t j = 0; j < kObjectives; ++j) merged[j] = std::max(merged[j], locals[c][j]);
  return {merged[0], merged[1], merged[2], merged[3], merged[4], merged[5]};
}

/// Dyadic suprema of the Fujii-Wilson constants of w and sigma, and of the
/// two one-supremum products that pair a per-cube Ap factor with a per-cube
/// Fujii-Wilson factor.
struct FwSups {
  double fw_w;   // sup FW(w, Q)
  double fw_s;   // sup FW(sigma, Q)
  double w0w;    // sup Ap(w,Q)^{1/p} FW(w,Q)^{1/p'}
  double w0s;    // sup Ap'(sigma,Q)^{1/p'} FW(sigma,Q)^{1/p}
};

FwSups fw_dyadic_sups(const WeightPair& pair) {
  const Mesh& mesh = pair.mesh();
  const Weight& w = pair.w();
  const Weight& sigma = pair.sigma();
  const std::vector<double> fww = fw_all_dyadic(w);
  const std::vector<double> fws = fw_all_dyadic(sigma);
  const double p = pair.p();
  const double pc = pair.p_conj();
  FwSups out{0.0, 0.0, 0.0, 0.0};
  for (Cube q : mesh.enumerate_dyadic()) {
    const Interval r = mesh.cells(q);
    const double len = static_cast<double>(r.num_cells());
    const double aw = (w.prefix_avg(r.end_cell) - w.prefix_avg(r.start_cell)) / len;
    const double as = (sigma.prefix_avg(r.end_cell) - sigma.prefix_avg(r.start_cell)) / len;
    const double ap = aw * std::pow(as, p - 1.0);
    const double apd = as * std::pow(aw, pc - 1.0);
    const double fw_q = fww[static_cast<std::size_t>(mesh.cube_id(q))];
    const double fs_q = fws[static_cast<std::size_t>(mesh.cube_id(q))];
    out.fw_w = std::max(out.fw_w, fw_q);
    out.fw_s = std::max(out.fw_s, fs_q);
    out.w0w = std::max(out.w0w, std::pow(ap, 1.0 / p) * std::pow(fw_q, 1.0 / pc));
    out.w0s = std::max(out.w0s, std::pow(apd, 1.0 / pc) * std::pow(fs_q, 1.0 / p));
  }
  return out;
}

double assemble_bound(BoundId id, const ScanSups& sc, const FwSups& fw, double p, double pc) {
  switch (id) {
    case BoundId::Buckley:
      return std::exp(sc.apdual);
    case BoundId::MaxExp0:
      return std::exp(sc.exp0s);
    case BoundId::MaxW:
      return std::pow(phi(std::exp(sc.apdual)), 1.0 / p) * fw.w0s;
    case BoundId::HlMixed:
      return std::pow(std::exp(sc.ap), 1.0 / p) *
             std::max(std::pow(fw.fw_w, 1.0 / pc), std::pow(fw.fw_s, 1.0 / p));
    case BoundId::Exp1:
      return std::exp(sc.exp1);
    case BoundId::Exp0:
      return std::max(std::pow(phi(std::exp(sc.ap)), 1.0 / p) * std::exp(sc.exp0w),
                      std::pow(phi(std::exp(sc.apdual)), 1.0 / pc) * std::exp(sc.exp0s));
    case BoundId::W0:
      return phi(std::exp(sc.ap)) * std::max(fw.w0w, fw.w0s);
    case BoundId::MixedPr:
    case BoundId::MixedPq:
      break;
  }
  throw std::invalid_argument("sweeps cover only the parameter-free bounds");
}

/// One report row (sans delta) for a pair: ap, both FW constants, the bound
/// columns (or the single observation quantity), then the two testing
/// constants of the tau-stopping family of w.
std::vector<double> sweep_columns(const WeightPair& pair, double alpha,
                                  std::span<const BoundId> bounds, bool observation,
                                  double tau) {
  const double p = pair.p();
  const double pc = pair.p_conj();
  const ScanSups sc = scan_all_intervals(pair, alpha);
  const FwSups fw = fw_dyadic_sups(pair);
  std::vector<double> out;
  out.reserve(5 + bounds.size());
  out.push_back(std::exp(sc.ap));
  out.push_back(fw.fw_w);
  out.push_back(fw.fw_s);
  if (observation) {
    out.push_back(std::exp(sc.obs));
  } else {
    for (BoundId id : bounds) out.push_back(assemble_bound(id, sc, fw, p, pc));
  }
  const auto wa = pair.w().averages();
  CellFunction wf{pair.mesh(), std::vector<double>(wa.begin(), wa.end())};
  const SparseFamily fam = build_sparse(wf, tau, pair.mesh().top_cube());
  out.push_back(testing_T(fam, pair, TestingDirection::Forward).value);
  out.push_back(testing_T(fam, pair, TestingDirection::Dual).value);
  return out;
}

void validate_common(const SweepConfig& cfg) {
  if (cfg.deltas.empty()) throw std::invalid_argument("sweep needs at least one delta");
  for (double d : cfg.deltas)
    if (!(d > 0.0) || !(d < 1.0)) throw std::invalid_argument("sweep deltas must lie in (0, 1)");
  if (cfg.levels < 3 || cfg.levels > 24)
    throw std::invalid_argument("sweep mesh levels must lie in [3, 24]");
  if (!(cfg.tau > 2.0)) throw std::invalid_argument("stopping factor must exceed 2");
}

SweepReport run_rows(const SweepConfig& cfg, bool observation,
                     const std::function<WeightPair(double delta, int levels)>& make_pair) {
  SweepReport report;
  report.config = cfg;
  report.observation = observation;
  report.columns = {"ap", "ainf_fw_w", "ainf_fw_sigma"};
  if (observation) {
    report.columns.push_back("mixed-alpha");
  } else {
    for (BoundId id : cfg.bounds) report.columns.emplace_back(bound_name(id));
  }
  report.columns.emplace_back("testing_fwd");
  report.columns.emplace_back("testing_dual");

  for (double delta : cfg.deltas) {
    const WeightPair base = make_pair(delta, cfg.levels);
    const WeightPair probe = make_pair(delta, cfg.levels + 1);
    SweepRow row;
    row.delta = delta;
    row.values = sweep_columns(base, cfg.alpha, cfg.bounds, observation, cfg.tau);
    const std::vector<double> doubled =
        sweep_columns(probe, cfg.alpha, cfg.bounds, observation, cfg.tau);
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      const double rel = std::abs(doubled[i] - row.values[i]) / std::abs(row.values[i]);
      row.max_rel_change = std::max(row.max_rel_change, rel);
    }
    row.converged = row.max_rel_change < 0.01;
    report.all_converged = report.all_converged && row.converged;
    report.rows.push_back(std::move(row));
  }

  if (report.rows.size() >= 3) {
    std::vector<double> ds;
    for (const SweepRow& r : report.rows) ds.push_back(r.delta);
    for (std::size_t col = 0; col < report.columns.size(); ++col) {
      std::vector<double> vals;
      for (const SweepRow& r : report.rows) vals.push_back(r.values[col]);
      report.slopes[report.columns[col]] = fit_slope(ds, vals);
    }
  }
  return report;
}

}  // namespace

SweepReport run_sweep(const SweepConfig& cfg) {
  validate_common(cfg);
  if (!(cfg.p > 2.0) || !std::isfinite(cfg.p))
    throw std::invalid_argument("the two-singularity sweep needs p > 2");
  if (!(cfg.alpha > 1.0 / cfg.p) || !(cfg.alpha < 0.5))
    throw std::invalid_argument("the two-singularity sweep needs alpha in (1/p, 1/2)");
  if (cfg.bounds.empty()) throw std::invalid_argument("sweep needs at least one bound column");
  for (BoundId id : cfg.bounds)
    if (bound_needs_param(id))
      throw std::invalid_argument("sweeps cover only the parameter-free bounds");
  return run_rows(cfg, false, [&](double delta, int levels) {
    return example_wdelta(cfg.p, delta, cfg.alpha, levels).pair;
  });
}

SweepReport run_observation_sweep(const SweepConfig& cfg) {
  validate_common(cfg);
  if (!(cfg.p > 1.0) || !std::isfinite(cfg.p))
    throw std::invalid_argument("the single-power sweep needs p > 1");
  if (!(cfg.alpha > 0.0) || !(cfg.alpha <= 1.0))
    throw std::invalid_argument("the single-power sweep needs alpha in (0, 1]");
  return run_rows(cfg, true, [&](double delta, int levels) {
    return observation_pair(cfg.p, delta, levels);
  });
}

SweepReport run_observation_sweep(double p, double alpha, std::span<const double> deltas,
                                  int levels) {
  SweepConfig cfg;
  cfg.p = p;
  cfg.alpha = alpha;
  cfg.deltas.assign(deltas.begin(), deltas.end());
  cfg.levels = levels;
  cfg.bounds.clear();
  return run_observation_sweep(cfg);
}

std::string sweep_to_csv(const SweepReport& report) {
  std::string out = "delta";
  for (const std::string& c : report.columns) {
    out += ',';
    out += c;
  }
  out += '\n';
  for (const SweepRow& row : report.rows) {
    out += fmt_g(row.delta, 12);
    for (double v : row.values) {
      out += ',';
      out += fmt_g(v, 12);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::string json_num(double v) { return fmt_g(v, 17); }

}  // namespace

std::string sweep_to_json(const SweepReport& report) {
  const SweepConfig& cfg = report.config;
  std::string out;
  out += "{\n";
  out += "  \"config\": {\n";
  out += "    \"example\": \"" + std::string(report.observation ? "observation" : "wdelta") +
         "\",\n";
  out += "    \"p\": " + json_num(cfg.p) + ",\n";
  out += "    \"alpha\": " + json_num(cfg.alpha) + ",\n";
  out += "    \"deltas\": [";
  for (std::size_t i = 0; i < cfg.deltas.size(); ++i)
    out += (i ? ", " : "") + json_num(cfg.deltas[i]);
  out += "],\n";
  out += "    \"levels\": " + std::to_string(cfg.levels) + ",\n";
  out += "    \"probe_levels\": " + std::to_string(cfg.levels + 1) + ",\n";
  out += "    \"tau\": " + json_num(cfg.tau) + ",\n";
  out += "    \"seed\": " + std::to_string(cfg.seed) + "\n";
  out += "  },\n";
  out += "  \"columns\": [";
  for (std::size_t i = 0; i < report.columns.size(); ++i)
    out += (i ? ", " : "") + ("\"" + report.columns[i] + "\"");
  out += "],\n";
  out += "  \"rows\": [\n";
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const SweepRow& row = report.rows[r];
    out += "    {\"delta\": " + json_num(row.delta) + ", \"values\": {";
    for (std::size_t i = 0; i < row.values.size(); ++i) {
      if (i) out += ", ";
      out += "\"" + report.columns[i] + "\": " + json_num(row.values[i]);
    }
    out += "}, \"converged\": ";
    out += row.converged ? "true" : "false";
    out += ", \"max_rel_change\": " + json_num(row.max_rel_change) + "}";
    if (r + 1 < report.rows.size()) out += ",";
    out += "\n";
  }
  out += "  ],\n";
  out += "  \"slopes\": {";
  bool first = true;
  for (const auto& [name, fit] : report.slopes) {
    if (!first) out += ",";
    first = false;
    out += "\n    \"" + name + "\": {\"slope\": " + json_num(fit.slope) +
           ", \"intercept\": " + json_num(fit.intercept) + ", \"r2\": " + json_num(fit.r2) + "}";
  }
  if (!report.slopes.empty()) out += "\n  ";
  out += "},\n";
  out += "  \"all_converged\": ";
  out += report.all_converged ? "true" : "false";
  out += "\n}\n";
  return out;
}

std::vector<WeightPair> random_corpus(std::uint64_t seed, std::size_t size, CorpusKind kind,
                                      int levels, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  if (levels < 2 || levels > 24)
    throw std::invalid_argument("corpus mesh levels must lie in [2, 24]");
  Rng rng(seed);
  std::vector<WeightPair> out;
  out.reserve(size);
  const cell_index n = cell_index{1} << levels;
  const Mesh mesh(0.0, std::ldexp(1.0, -levels), levels);
  for (std::size_t k = 0; k < size; ++k) {
    switch (kind) {
      case CorpusKind::CellAverages: {
        std::vector<double> avgs(static_cast<std::size_t>(n));
        for (double& a : avgs) a = rng.log_uniform(std::exp(-3.0), std::exp(3.0));
        out.push_back(WeightPair::discrete(Weight::from_cell_averages(mesh, avgs), p));
        break;
      }
      case CorpusKind::Power: {
        // Admissible range: gamma > -1 keeps w integrable, gamma < p-1 keeps
        // sigma = w^{1-p'} integrable; stay 10% inside both walls.
        const double gamma = rng.uniform(-0.9, 0.9 * (p - 1.0));
        PowerPiece piece;
        piece.gamma = gamma;
        piece.singularity = rng.uniform_int(2) == 0 ? 0.0 : 1.0;
        piece.support = Interval{0, n};
        WeightModel model;
        model.background = 1.0;
        model.pieces = {piece};
        out.push_back(WeightPair::analytic(mesh, model, p));
        break;
      }
      case CorpusKind::WDelta: {
        if (!(p > 2.0))
          throw std::invalid_argument("the two-singularity corpus needs p > 2");
        const double delta = std::ldexp(1.0, -static_cast<int>(4 + k % 3));
        const double alpha = rng.uniform(1.0 / p + 0.05, 0.45);
        out.push_back(example_wdelta(p, delta, alpha, levels).pair);
        break;
      }
    }
  }
  return out;
}

}  // namespace aplab
