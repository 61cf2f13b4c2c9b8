#include "aplab/maximal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aplab/parallel.hpp"

namespace aplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Adds, for every cell of [a, c), the best average over intervals that cross
// the midpoint mid, on top of whatever cur already holds. Scratch buffers g/h
// must each hold at least (c - a) entries.
void apply_crossing(std::span<const double> prefix, cell_index a, cell_index mid, cell_index c,
                    std::span<double> cur, std::span<double> g, std::span<double> h) {
  const cell_index nl = mid - a;
  const cell_index nr = c - mid;
  for (cell_index e = 0; e < nr; ++e) h[static_cast<std::size_t>(e)] = kNegInf;
  for (cell_index s = a; s < mid; ++s) {
    const double ps = prefix[static_cast<std::size_t>(s)];
    double best = kNegInf;
    for (cell_index e = mid + 1; e <= c; ++e) {
      const double avg = (prefix[static_cast<std::size_t>(e)] - ps) / static_cast<double>(e - s);
      if (avg > best) best = avg;
      double& he = h[static_cast<std::size_t>(e - mid - 1)];
      if (avg > he) he = avg;
    }
    g[static_cast<std::size_t>(s - a)] = best;
  }
  // Left half: an interval crossing mid contains cell i iff its start is <= i.
  double run = kNegInf;
  for (cell_index i = 0; i < nl; ++i) {
    run = std::max(run, g[static_cast<std::size_t>(i)]);
    double& ci = cur[static_cast<std::size_t>(a + i)];
    ci = std::max(ci, run);
  }
  // Right half: it contains cell i iff its end is > i.
  run = kNegInf;
  for (cell_index i = c - 1; i >= mid; --i) {
    run = std::max(run, h[static_cast<std::size_t>(i + 1 - mid - 1)]);
    double& ci = cur[static_cast<std::size_t>(i)];
    ci = std::max(ci, run);
  }
}

void range_maximal_rec(std::span<const double> prefix, cell_index lo, cell_index hi,
                       std::span<double> cur, std::span<double> g, std::span<double> h) {
  if (hi - lo <= 1) return;
  const cell_index mid = lo + (hi - lo) / 2;
  range_maximal_rec(prefix, lo, mid, cur, g, h);
  range_maximal_rec(prefix, mid, hi, cur, g, h);
  apply_crossing(prefix, lo, mid, hi, cur, g, h);
}

}  // namespace

std::vector<double> prefix_sums(std::span<const double> v) {
  std::vector<double> p(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) p[i + 1] = p[i] + v[i];
  return p;
}

std::vector<double> range_maximal(std::span<const double> v, cell_index s, cell_index e) {
  if (s < 0 || e > static_cast<cell_index>(v.size()) || s >= e)
    throw std::invalid_argument("range_maximal needs a nonempty range inside the data");
  const std::vector<double> prefix = prefix_sums(v);
  std::vector<double> cur(v.begin(), v.end());
  std::vector<double> g(v.size()), h(v.size());
  range_maximal_rec(prefix, s, e, cur, g, h);
  return std::vector<double>(cur.begin() + static_cast<std::ptrdiff_t>(s),
                             cur.begin() + static_cast<std::ptrdiff_t>(e));
}

void dyadic_restricted_maximal_sweep(
    const Mesh& mesh, std::span<const double> v,
    const std::function<void(Cube, std::span<const double>)>& visit) {
  const cell_index n = mesh.num_cells();
  if (static_cast<cell_index>(v.size()) != n)
    throw std::invalid_argument("sweep data must match the mesh size");
  const std::vector<double> prefix = prefix_sums(v);
  std::vector<double> cur(v.begin(), v.end());
  std::vector<double> g(v.size()), h(v.size());

  for (cell_index i = 0; i < n; ++i)
    visit(Cube{0, i}, std::span<const double>(cur).subspan(static_cast<std::size_t>(i), 1));

  for (int level = 1; level <= mesh.levels(); ++level) {
    const cell_index size = cell_index{1} << level;
    const cell_index count = n >> level;
    for (cell_index m = 0; m < count; ++m) {
      const cell_index a = m * size;
      apply_crossing(prefix, a, a + size / 2, a + size, cur, g, h);
      visit(Cube{level, m},
            std::span<const double>(cur).subspan(static_cast<std::size_t>(a),
                                                 static_cast<std::size_t>(size)));
    }
  }
}

CellFunction maximal_mesh(const CellFunction& f) {
  std::vector<double> v(f.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f.values[i]);
  return CellFunction{f.mesh, range_maximal(v, 0, f.mesh.num_cells())};
}

CellFunction dyadic_maximal(const CellFunction& f) {
  const cell_index n = f.mesh.num_cells();
  if (static_cast<cell_index>(f.values.size()) != n)
    throw std::invalid_argument("function data must match the mesh size");
  std::vector<double> v(f.values.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f.values[i]);
  const std::vector<double> prefix = prefix_sums(v);
  std::vector<double> out = v;
  for (int level = 1; level <= f.mesh.levels(); ++level) {
    const cell_index size = cell_index{1} << level;
    for (cell_index a = 0; a < n; a += size) {
      const double avg = (prefix[static_cast<std::size_t>(a + size)] -
                          prefix[static_cast<std::size_t>(a)]) /
                         static_cast<double>(size);
      for (cell_index i = a; i < a + size; ++i) {
        double& oi = out[static_cast<std::size_t>(i)];
        oi = std::max(oi, avg);
      }
    }
  }
  return CellFunction{f.mesh, std::move(out)};
}

CellFunction weighted_dyadic_maximal(const CellFunction& f, const Weight& w) {
  const cell_index n = f.mesh.num_cells();
  if (f.mesh != w.mesh()) throw std::invalid_argument("function and weight meshes differ");
  if (static_cast<cell_index>(f.values.size()) != n)
    throw std::invalid_argument("function data must match the mesh size");
  std::vector<double> fw(f.values.size());
  for (std::size_t i = 0; i < fw.size(); ++i) fw[i] = std::abs(f.values[i]) * w.averages()[i];
  const std::vector<double> prefix = prefix_sums(fw);
  std::vector<double> out(f.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(f.values[i]);
  for (int level = 1; level <= f.mesh.levels(); ++level) {
    const cell_index size = cell_index{1} << level;
    for (cell_index a = 0; a < n; a += size) {
      const double mass = w.prefix_avg(a + size) - w.prefix_avg(a);
      const double avg = (prefix[static_cast<std::size_t>(a + size)] -
                          prefix[static_cast<std::size_t>(a)]) /
                         mass;
      for (cell_index i = a; i < a + size; ++i) {
        double& oi = out[static_cast<std::size_t>(i)];
        oi = std::max(oi, avg);
      }
    }
  }
  return CellFunction{f.mesh, std::move(out)};
}

CellFunction geometric_maximal(const CellFunction& f, SupScope scope) {
  const cell_index n = f.mesh.num_cells();
  if (static_cast<cell_index>(f.values.size()) != n)
    throw std::invalid_argument("function data must match the mesh size");
  std::vector<double> logs(f.values.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (!(f.values[i] > 0.0)) throw std::invalid_argument("geometric maximal requires positive values");
    logs[i] = std::log(f.values[i]);
  }
  std::vector<double> out;
  if (scope == SupScope::AllIntervals) {
    out = range_maximal(logs, 0, n);
  } else {
    const std::vector<double> prefix = prefix_sums(logs);
    out = logs;
    for (int level = 1; level <= f.mesh.levels(); ++level) {
      const cell_index size = cell_index{1} << level;
      for (cell_index a = 0; a < n; a += size) {
        const double avg = (prefix[static_cast<std::size_t>(a + size)] -
                            prefix[static_cast<std::size_t>(a)]) /
                           static_cast<double>(size);
        for (cell_index i = a; i < a + size; ++i) {
          double& oi = out[static_cast<std::size_t>(i)];
          oi = std::max(oi, avg);
        }
      }
    }
  }
  for (double& x : out) x = std::exp(x);
  return CellFunction{f.mesh, std::move(out)};
}

}  // namespace aplab
