#include "aplab/testing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aplab/parallel.hpp"
#include "aplab/rng.hpp"

namespace aplab {

namespace {

struct Candidate {
  double value = -std::numeric_limits<double>::infinity();
  Interval where{0, 1};
};

/// sup_R (sum_{i in R} g_i^p u_i / sum_{i in R} d_i)^{1/p} over dyadic R,
/// where g is accumulated level by level: before level k is scanned, every
/// member of S at level <= k has added its d-average onto its cells, so the
/// restriction of g to a level-k cube R is exactly the sum over members
/// inside R. The cell width cancels between numerator and denominator.
SupremumResult testing_sum_sup(const SparseFamily& S, std::span<const double> d,
                               std::span<const double> u, double p) {
  const Mesh& mesh = S.mesh();
  const cell_index n = mesh.num_cells();
  const std::vector<double> dprefix = prefix_sums(d);

  // Members grouped by level, in canonical (largest-first) storage order.
  std::vector<std::vector<std::size_t>> by_level(static_cast<std::size_t>(mesh.levels()) + 1);
  for (std::size_t i = 0; i < S.size(); ++i)
    by_level[static_cast<std::size_t>(S.cube(i).level)].push_back(i);

  std::vector<double> g(static_cast<std::size_t>(n), 0.0);
  Candidate best;
  for (int level = 0; level <= mesh.levels(); ++level) {
    for (std::size_t i : by_level[static_cast<std::size_t>(level)]) {
      const Interval r = mesh.cells(S.cube(i));
      const double avg = run_average(dprefix, d, r.start_cell, r.end_cell);
      for (cell_index c = r.start_cell; c < r.end_cell; ++c)
        g[static_cast<std::size_t>(c)] += avg;
    }
    const cell_index size = cell_index{1} << level;
    for (cell_index a = 0; a < n; a += size) {
      double num = 0.0;
      for (cell_index c = a; c < a + size; ++c) {
        const double gc = g[static_cast<std::size_t>(c)];
        if (gc > 0.0) num += std::pow(gc, p) * u[static_cast<std::size_t>(c)];
      }
      const double den = dprefix[static_cast<std::size_t>(a + size)] -
                         dprefix[static_cast<std::size_t>(a)];
      const double value = std::pow(num / den, 1.0 / p);
      const Interval r{a, a + size};
      if (sup_candidate_beats(value, r, best.value, best.where)) best = {value, r};
    }
  }
  return {best.value, best.where, SupScope::Dyadic};
}

}  // namespace

SupremumResult testing_T(const SparseFamily& S, const WeightPair& pair, TestingDirection dir) {
  if (S.mesh() != pair.mesh()) throw std::invalid_argument("family and pair meshes differ");
  if (dir == TestingDirection::Forward)
    return testing_sum_sup(S, pair.sigma().averages(), pair.w().averages(), pair.p());
  return testing_sum_sup(S, pair.w().averages(), pair.sigma().averages(), pair.p_conj());
}

SupremumResult testing_M(const WeightPair& pair, double p) {
  if (!(p > 1.0) || !std::isfinite(p))
    throw std::invalid_argument("testing exponent must lie in (1, inf)");
  const Mesh& mesh = pair.mesh();
  const Weight& w = pair.w();
  const Weight& sigma = pair.sigma();
  Candidate best;
  dyadic_restricted_maximal_sweep(
      mesh, sigma.averages(), [&](Cube q, std::span<const double> maxfun) {
        const Interval r = mesh.cells(q);
        double num = 0.0;
        for (cell_index c = r.start_cell; c < r.end_cell; ++c)
          num += std::pow(maxfun[static_cast<std::size_t>(c - r.start_cell)], p) *
                 w.cell_average(c);
        const double den = sigma.prefix_avg(r.end_cell) - sigma.prefix_avg(r.start_cell);
        const double value = std::pow(num / den, 1.0 / p);
        if (sup_candidate_beats(value, r, best.value, best.where)) best = {value, r};
      });
  return {best.value, best.where, SupScope::Dyadic};
}

double weighted_lp_norm(const CellFunction& f, const Weight& w, double p) {
  if (f.mesh != w.mesh()) throw std::invalid_argument("function and weight meshes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    acc += std::pow(std::abs(f.values[i]), p) * w.cell_average(static_cast<cell_index>(i));
  return std::pow(acc * f.mesh.cell_width(), 1.0 / p);
}

double weak_lp_quasinorm(const CellFunction& g, const Weight& w, double p) {
  if (g.mesh != w.mesh()) throw std::invalid_argument("function and weight meshes differ");
  std::vector<std::pair<double, double>> cells(g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i)
    cells[i] = {std::abs(g.values[i]), w.cell_average(static_cast<cell_index>(i))};
  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  // sup_{lambda > 0} lambda * w({|g| > lambda})^{1/p}. The distribution
  // function is a step function, constant between consecutive distinct values
  // of |g|, so the supremum is attained in the limit lambda -> v from below
  // and equals max over distinct positive values v of v * w({|g| >= v})^{1/p}.
  double best = 0.0;
  double mass = 0.0;
  const double h = g.mesh.cell_width();
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i;
    const double v = cells[i].first;
    while (j < cells.size() && cells[j].first == v) {
      mass += cells[j].second * h;
      ++j;
    }
    if (v > 0.0) best = std::max(best, v * std::pow(mass, 1.0 / p));
    i = j;
  }
  return best;
}

double sparse_rayleigh(const SparseFamily& S, const WeightPair& pair, const CellFunction& f) {
  if (f.mesh != pair.mesh()) throw std::invalid_argument("function and pair meshes differ");
  const Weight& w = pair.w();
  const Weight& sigma = pair.sigma();
  const double p = pair.p();
  std::vector<double> fs(f.values.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    fs[i] = std::abs(f.values[i]) * sigma.cell_average(static_cast<cell_index>(i));
  const CellFunction tf = sparse_T(S, CellFunction{f.mesh, std::move(fs)});
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    num += std::pow(tf.values[i], p) * w.cell_average(static_cast<cell_index>(i));
    den += std::pow(std::abs(f.values[i]), p) * sigma.cell_average(static_cast<cell_index>(i));
  }
  if (den == 0.0) return 0.0;
  return std::pow(num / den, 1.0 / p);
}

namespace {

/// One ascent run; returns its best ratio, best function, and steps used.
struct AscentOutcome {
  double ratio = 0.0;
  CellFunction best;
  std::int64_t steps = 0;
  bool converged = false;
};

AscentOutcome ascend(const SparseFamily& S, const WeightPair& pair, CellFunction f) {
  constexpr int kMaxSteps = 10000;
  constexpr double kTol = 1e-10;
  const Weight& w = pair.w();
  const Weight& sigma = pair.sigma();
  const double p = pair.p();
  const std::size_t n = f.values.size();

  AscentOutcome out;
  out.best = f;
  out.ratio = sparse_rayleigh(S, pair, f);
  double prev = out.ratio;
  for (int step = 1; step <= kMaxSteps; ++step) {
    ++out.steps;
    // f <- (T^S(w (T^S(f sigma))^{p-1}))^{1/(p-1)}, then normalize.
    std::vector<double> fs(n);
    for (std::size_t i = 0; i < n; ++i)
      fs[i] = f.values[i] * sigma.cell_average(static_cast<cell_index>(i));
    CellFunction t1 = sparse_T(S, CellFunction{f.mesh, std::move(fs)});
    for (std::size_t i = 0; i < n; ++i)
      t1.values[i] = std::pow(t1.values[i], p - 1.0) * w.cell_average(static_cast<cell_index>(i));
    CellFunction t2 = sparse_T(S, t1);
    double norm_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      t2.values[i] = std::pow(t2.values[i], 1.0 / (p - 1.0));
      norm_p += std::pow(t2.values[i], p) * sigma.cell_average(static_cast<cell_index>(i));
    }
    if (!(norm_p > 0.0)) {
      out.converged = true;  // landed on the zero function; the ratio cannot move
      break;
    }
    const double scale = std::pow(norm_p, -1.0 / p);
    for (double& x : t2.values) x *= scale;
    f = std::move(t2);
    const double ratio = sparse_rayleigh(S, pair, f);
    if (ratio > out.ratio) {
      out.ratio = ratio;
      out.best = f;
    }
    if (std::abs(ratio - prev) <= kTol * std::max(1.0, std::abs(prev))) {
      out.converged = true;
      break;
    }
    prev = ratio;
  }
  return out;
}

}  // namespace

NormEstimate norm_estimate(const SparseFamily& S, const WeightPair& pair, NormMethod method,
                           std::uint64_t seed) {
  if (S.mesh() != pair.mesh()) throw std::invalid_argument("family and pair meshes differ");
  if (method.random_starts < 0) throw std::invalid_argument("restart count cannot be negative");
  const Mesh& mesh = pair.mesh();
  const std::size_t n = static_cast<std::size_t>(mesh.num_cells());

  std::vector<CellFunction> starts;
  starts.push_back(CellFunction{mesh, std::vector<double>(n, 1.0)});
  Rng rng(seed);
  for (int k = 0; k < method.random_starts; ++k) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.log_uniform(0.1, 10.0);
    starts.push_back(CellFunction{mesh, std::move(v)});
  }
  if (method.include_witnesses) {
    const double pc = pair.p_conj();
    for (Cube q : mesh.enumerate_dyadic()) {
      const Interval r = mesh.cells(q);
      std::vector<double> ind(n, 0.0);
      for (cell_index c = r.start_cell; c < r.end_cell; ++c)
        ind[static_cast<std::size_t>(c)] = 1.0;
      CellFunction chi{mesh, std::move(ind)};
      // The indicator itself reaches the forward testing quantity at q; its
      // transfer through the operator reaches the dual one.
      std::vector<double> gw(n);
      for (std::size_t i = 0; i < n; ++i)
        gw[i] = chi.values[i] * pair.w().cell_average(static_cast<cell_index>(i));
      CellFunction transfer = sparse_T(S, CellFunction{mesh, std::move(gw)});
      for (double& x : transfer.values) x = std::pow(x, pc - 1.0);
      starts.push_back(std::move(chi));
      starts.push_back(std::move(transfer));
    }
  }

  std::vector<AscentOutcome> outcomes(starts.size());
  parallel_chunks(static_cast<std::int64_t>(starts.size()),
                  [&](int, std::int64_t begin, std::int64_t end) {
                    for (std::int64_t i = begin; i < end; ++i)
                      outcomes[static_cast<std::size_t>(i)] =
                          ascend(S, pair, starts[static_cast<std::size_t>(i)]);
                  });

  NormEstimate est;
  est.witness = CellFunction{mesh, std::vector<double>(n, 0.0)};
  std::size_t best_idx = 0;
  bool have = false;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    est.iterations += outcomes[i].steps;
    if (!have || outcomes[i].ratio > outcomes[best_idx].ratio) {
      best_idx = i;
      have = true;
    }
  }
  if (have) {
    est.lower_bound = outcomes[best_idx].ratio;
    est.witness = outcomes[best_idx].best;
    est.converged = outcomes[best_idx].converged;
  }
  return est;
}

InterpolationExponents interpolation_theta(double p, double q) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  if (!(q >= 1.0) || !(q < p)) throw std::invalid_argument("q must satisfy 1 <= q < p");
  InterpolationExponents out;
  out.p = p;
  out.q = q;
  out.eps = p - q;
  const double lo = p - out.eps;  // = q
  const double hi = p + out.eps;  // = 2p - q
  out.theta = (1.0 / p - 1.0 / hi) / (1.0 / lo - 1.0 / hi);
  const double first = out.theta / lo + (1.0 - out.theta) / hi;
  // Conjugate identity through 1/x' = 1 - 1/x, finite even at lo = 1.
  const double second = out.theta * (1.0 - 1.0 / lo) + (1.0 - out.theta) * (1.0 - 1.0 / hi);
  if (std::abs(first - 1.0 / p) > 1e-12 || std::abs(second - (1.0 - 1.0 / p)) > 1e-12)
    throw std::logic_error("interpolation exponents failed their defining identities");
  return out;
}

}  // namespace aplab
