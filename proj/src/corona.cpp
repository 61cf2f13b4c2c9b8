#include "aplab/corona.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "aplab/characteristics.hpp"

namespace aplab {

namespace {

void check_scores(const SparseFamily& cubes, const std::vector<double>& scores) {
  if (scores.size() != cubes.size())
    throw std::invalid_argument("one score per family cube required");
  for (double a : scores)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("scores must be positive and finite");
}

double quantity(const SparseFamily& cubes, const std::vector<double>& scores, const Weight& nu,
                double r, std::size_t i) {
  return std::pow(scores[i], r) * nu.average(cubes.cube(i));
}

}  // namespace

WeightedFamily::WeightedFamily(SparseFamily cubes, std::vector<double> scores, Weight nu,
                               double r, double c, double big_c)
    : cubes_(std::move(cubes)),
      scores_(std::move(scores)),
      nu_(std::move(nu)),
      r_(r),
      c_(c),
      big_c_(big_c) {}

WeightedFamily WeightedFamily::measured(SparseFamily cubes, std::vector<double> scores,
                                        Weight nu, double r) {
  check_scores(cubes, scores);
  if (cubes.mesh() != nu.mesh()) throw std::invalid_argument("family and measure meshes differ");
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("balance exponent must be positive and finite");
  if (cubes.size() == 0) throw std::invalid_argument("family must be nonempty");
  double lo = quantity(cubes, scores, nu, r, 0);
  double hi = lo;
  for (std::size_t i = 1; i < cubes.size(); ++i) {
    const double q = quantity(cubes, scores, nu, r, i);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return WeightedFamily(std::move(cubes), std::move(scores), std::move(nu), r, lo, hi);
}

WeightedFamily WeightedFamily::supplied(SparseFamily cubes, std::vector<double> scores,
                                        Weight nu, double r, double c, double C) {
  check_scores(cubes, scores);
  if (cubes.mesh() != nu.mesh()) throw std::invalid_argument("family and measure meshes differ");
  if (!(r > 0.0) || !std::isfinite(r))
    throw std::invalid_argument("balance exponent must be positive and finite");
  if (!(0.0 < c && c <= C) || !std::isfinite(C))
    throw std::invalid_argument("balance window needs 0 < c <= C < inf");
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    const double q = quantity(cubes, scores, nu, r, i);
    if (!(c <= q && q <= C))
      throw std::invalid_argument("balance window violated by a family cube");
  }
  return WeightedFamily(std::move(cubes), std::move(scores), std::move(nu), r, c, C);
}

double WeightedFamily::balance_quantity(std::size_t i) const {
  return quantity(cubes_, scores_, nu_, r_, i);
}

CoronaResult corona_decompose(const WeightedFamily& fam) {
  const SparseFamily& S = fam.family();
  const std::size_t n = S.size();

  // Family tree children, ordered by member index for determinism.
  std::vector<std::vector<std::size_t>> kids(n);
  std::vector<std::size_t> roots;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t p = S.parent_index(i);
    if (p < 0)
      roots.push_back(i);
    else
      kids[static_cast<std::size_t>(p)].push_back(i);
  }

  CoronaResult res;
  res.stop_parent.assign(n, -1);
  res.stopping.assign(n, false);
  res.ratio_class.assign(n, 0);

  std::vector<std::size_t> frontier = roots;  // next generation's stopping cubes
  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end());
    res.generations.push_back(frontier);
    std::vector<std::size_t> next;
    for (std::size_t p : frontier) {
      res.stopping[p] = true;
      res.stop_parent[p] = static_cast<std::int64_t>(p);
      const double cutoff = 2.0 * fam.score(p);
      // Probe the subtree under p; descend past members that do not stop.
      std::vector<std::size_t> walk(kids[p].rbegin(), kids[p].rend());
      while (!walk.empty()) {
        const std::size_t q = walk.back();
        walk.pop_back();
        if (fam.score(q) > cutoff) {
          next.push_back(q);
        } else {
          res.stop_parent[q] = static_cast<std::int64_t>(p);
          walk.insert(walk.end(), kids[q].rbegin(), kids[q].rend());
        }
      }
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double t = fam.score(i) / fam.score(static_cast<std::size_t>(res.stop_parent[i]));
    // b is pinned down by 2^{-b} < t <= 2^{1-b}; start from the float guess
    // and correct with exact power-of-two comparisons.
    std::int64_t b = static_cast<std::int64_t>(std::llround(std::floor(1.0 - std::log2(t))));
    while (!(std::ldexp(1.0, static_cast<int>(-b)) < t)) ++b;
    while (!(t <= std::ldexp(1.0, static_cast<int>(1 - b)))) --b;
    res.ratio_class[i] = b;
  }
  return res;
}

CoronaBoundCheck verify_corona_bound(const WeightedFamily& fam, const CoronaResult& res,
                                     double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("exponent must be positive");
  const SparseFamily& S = fam.family();
  const Mesh& mesh = S.mesh();
  std::vector<double> g(static_cast<std::size_t>(mesh.num_cells()), 0.0);
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Interval r = mesh.cells(S.cube(i));
    for (cell_index c = r.start_cell; c < r.end_cell; ++c)
      g[static_cast<std::size_t>(c)] += fam.score(i);
  }
  double lhs_p = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c)
    if (g[c] > 0.0)
      lhs_p += std::pow(g[c], p) * fam.nu().cell_average(static_cast<cell_index>(c));
  lhs_p *= mesh.cell_width();

  double rhs_p = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i)
    if (res.stopping[i]) rhs_p += std::pow(fam.score(i), p) * fam.nu().integral(S.cube(i));

  CoronaBoundCheck out;
  out.lhs = std::pow(lhs_p, 1.0 / p);
  out.rhs = (fam.balance_C() / fam.balance_c()) * std::pow(rhs_p, 1.0 / p);
  out.ratio = out.lhs / out.rhs;
  return out;
}

ApStratification stratify_ap(const SparseFamily& S, const WeightPair& pair) {
  if (S.mesh() != pair.mesh()) throw std::invalid_argument("family and pair meshes differ");
  ApStratification out;
  out.bucket_of.reserve(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    const double v = ap_local(pair, S.cube(i));
    std::int64_t a = static_cast<std::int64_t>(std::llround(std::ceil(std::log2(v))));
    while (!(v <= std::ldexp(1.0, static_cast<int>(a)))) ++a;
    while (a > 0 && v <= std::ldexp(1.0, static_cast<int>(a - 1))) --a;
    out.bucket_of.push_back(a);
  }
  const double global = global_sup(pair, FlavorSpec::ap()).value;
  out.cap = static_cast<std::int64_t>(std::llround(std::floor(std::log2(global))));
  while (std::ldexp(1.0, static_cast<int>(out.cap)) > global) --out.cap;
  while (std::ldexp(1.0, static_cast<int>(out.cap + 1)) <= global) ++out.cap;
  if (!out.bucket_of.empty()) {
    auto [lo, hi] = std::minmax_element(out.bucket_of.begin(), out.bucket_of.end());
    out.min_bucket = *lo;
    out.max_bucket = *hi;
    if (out.min_bucket < -1 || out.max_bucket > out.cap + 1)
      throw std::logic_error("stratification bucket escaped its provable range");
  }
  return out;
}

std::string corona_to_json(const WeightedFamily& fam, const CoronaResult& res) {
  const SparseFamily& S = fam.family();
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& gen : res.generations) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t i : gen) {
      const Cube q = S.cube(i);
      row.push_back({{"level", q.level}, {"offset", q.offset}});
    }
    gens.push_back(std::move(row));
  }
  nlohmann::json parent = nlohmann::json::object();
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Cube q = S.cube(i);
    const Cube t = S.cube(static_cast<std::size_t>(res.stop_parent[i]));
    parent[std::to_string(q.level) + ":" + std::to_string(q.offset)] = {{"level", t.level},
                                                                        {"offset", t.offset}};
  }
  nlohmann::json j{{"generations", std::move(gens)}, {"parent", std::move(parent)}};
  return j.dump(2) + "\n";
}

WeightedFamily random_weighted_family(const Mesh& mesh, Rng& rng, double r) {
  if (mesh.levels() < 2)
    throw std::invalid_argument("random families need a mesh of at least four cells");
  std::vector<Cube> cubes;
  std::vector<Cube> stack{mesh.top_cube()};
  while (!stack.empty()) {
    const Cube q = stack.back();
    stack.pop_back();
    cubes.push_back(q);
    if (q.level < 2) continue;
    const double roll = rng.uniform();
    const int spawn = roll < 0.25 ? 0 : roll < 0.75 ? 1 : 2;
    if (spawn == 0) continue;
    cell_index first = static_cast<cell_index>(rng.uniform_int(4));
    stack.push_back(Cube{q.level - 2, 4 * q.offset + first});
    if (spawn == 2) {
      cell_index second = static_cast<cell_index>(rng.uniform_int(3));
      if (second >= first) ++second;
      stack.push_back(Cube{q.level - 2, 4 * q.offset + second});
    }
  }

  std::vector<double> avgs(static_cast<std::size_t>(mesh.num_cells()));
  for (double& a : avgs) a = rng.log_uniform(0.2, 5.0);
  Weight nu = Weight::from_cell_averages(mesh, avgs);

  SparseFamily fam = SparseFamily::from_cubes(mesh, std::move(cubes));
  std::vector<double> scores(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const double target = rng.log_uniform(0.5, 2.0);
    scores[i] = std::pow(target / nu.average(fam.cube(i)), 1.0 / r);
  }
  return WeightedFamily::measured(std::move(fam), std::move(scores), std::move(nu), r);
}

}  // namespace aplab
