#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <json.hpp>

#include "aplab/maximal.hpp"
#include "aplab/rng.hpp"
#include "aplab/sparse.hpp"

using namespace aplab;

namespace {

Mesh unit_mesh(int levels) { return Mesh(0.0, std::ldexp(1.0, -levels), levels); }

// Reference stopping-time construction: children of P are the maximal dyadic
// cubes strictly inside P whose average exceeds tau times P's average.
void collect_members(const Mesh& mesh, const std::vector<double>& prefix,
                     const std::vector<double>& v, Cube base, double tau,
                     std::set<std::pair<int, cell_index>>* out) {
  out->insert({base.level, base.offset});
  const Interval br = mesh.cells(base);
  const double base_avg = run_average(prefix, v, br.start_cell, br.end_cell);
  // Walk down from base; descend past cubes that do not qualify.
  std::vector<Cube> stack;
  if (base.level > 0) {
    stack.push_back(Cube{base.level - 1, base.offset * 2});
    stack.push_back(Cube{base.level - 1, base.offset * 2 + 1});
  }
  while (!stack.empty()) {
    const Cube q = stack.back();
    stack.pop_back();
    const Interval r = mesh.cells(q);
    const double a = run_average(prefix, v, r.start_cell, r.end_cell);
    if (a > tau * base_avg) {
      collect_members(mesh, prefix, v, q, tau, out);
    } else if (q.level > 0) {
      stack.push_back(Cube{q.level - 1, q.offset * 2});
      stack.push_back(Cube{q.level - 1, q.offset * 2 + 1});
    }
  }
}

}  // namespace

TEST_CASE("stopping construction on a spike") {
  const Mesh mesh = unit_mesh(3);
  std::vector<double> v(8, 1.0);
  v[7] = 100.0;
  const CellFunction f{mesh, v};
  const SparseFamily S = build_sparse(f, 4.0, mesh.top_cube());

  REQUIRE(S.size() == 2);  // root plus the spike cell
  CHECK(S.index_of(Cube{3, 0}).has_value());
  CHECK(S.index_of(Cube{0, 7}).has_value());

  const std::size_t root = *S.index_of(Cube{3, 0});
  const std::size_t spike = *S.index_of(Cube{0, 7});
  CHECK(S.parent_index(spike) == static_cast<std::int64_t>(root));
  CHECK(S.parent_index(root) == -1);
  CHECK(S.covered_cells(root) == 1);
  CHECK(S.exclusive_size(root) == 7);
  CHECK(S.exclusive_size(spike) == 1);
  CHECK(S.owner(3) == static_cast<std::int64_t>(root));
  CHECK(S.owner(7) == static_cast<std::int64_t>(spike));

  const CellFunction ms = sparse_M(S, f);
  for (int i = 0; i < 7; ++i) CHECK(ms.values[static_cast<std::size_t>(i)] == 13.375);
  CHECK(ms.values[7] == 100.0);
}

TEST_CASE("sparse sum operator on a nested chain") {
  const Mesh mesh = unit_mesh(2);
  const SparseFamily S =
      SparseFamily::from_cubes(mesh, {Cube{2, 0}, Cube{1, 0}, Cube{0, 0}});
  const CellFunction ones{mesh, std::vector<double>(4, 1.0)};

  const CellFunction t = sparse_T(S, ones);
  CHECK(t.values == std::vector<double>{3.0, 2.0, 1.0, 1.0});

  const CellFunction tr = sparse_T(S, ones, Cube{1, 0});
  CHECK(tr.values == std::vector<double>{2.0, 1.0, 0.0, 0.0});
}

TEST_CASE("family validation rejects bad inputs") {
  const Mesh mesh = unit_mesh(2);
  CHECK_THROWS_AS(SparseFamily::from_cubes(mesh, {Cube{2, 0}, Cube{2, 0}}),
                  std::invalid_argument);  // duplicate
  CHECK_THROWS_AS(SparseFamily::from_cubes(mesh, {Cube{2, 0}, Cube{1, 0}, Cube{1, 1}}),
                  std::invalid_argument);  // descendants cover all of the root
  CHECK_THROWS_AS(SparseFamily::from_cubes(mesh, {Cube{3, 0}}),
                  std::invalid_argument);  // out of range for this mesh

  const CellFunction f{mesh, std::vector<double>{1.0, 2.0, 3.0, 4.0}};
  CHECK_THROWS_AS(build_sparse(f, 2.0, mesh.top_cube()), std::invalid_argument);
  const CellFunction neg{mesh, std::vector<double>{1.0, -2.0, 3.0, 4.0}};
  CHECK_THROWS_AS(build_sparse(neg, 4.0, mesh.top_cube()), std::invalid_argument);
  const CellFunction zero{mesh, std::vector<double>(4, 0.0)};
  CHECK_THROWS_AS(build_sparse(zero, 4.0, mesh.top_cube()), std::invalid_argument);
}

TEST_CASE("empty families are valid and inert") {
  const Mesh mesh = unit_mesh(2);
  const SparseFamily S = SparseFamily::from_cubes(mesh, {});
  CHECK(S.size() == 0);
  const CellFunction ones{mesh, std::vector<double>(4, 1.0)};
  CHECK(sparse_T(S, ones).values == std::vector<double>(4, 0.0));
  CHECK(sparse_M(S, ones).values == std::vector<double>(4, 0.0));
  for (cell_index i = 0; i < 4; ++i) CHECK(S.owner(i) == -1);
}

TEST_CASE("construction matches the reference stopping recursion") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Mesh mesh = unit_mesh(6);
    std::vector<double> v(64);
    for (double& x : v) x = rng.uniform() < 0.15 ? 0.0 : rng.log_uniform(0.05, 20.0);
    bool any = false;
    for (double x : v) any = any || x > 0.0;
    if (!any) v[0] = 1.0;
    const CellFunction f{mesh, v};
    const SparseFamily S = build_sparse(f, 4.0, mesh.top_cube());

    std::set<std::pair<int, cell_index>> expect;
    const auto prefix = prefix_sums(v);
    collect_members(mesh, prefix, v, mesh.top_cube(), 4.0, &expect);

    std::set<std::pair<int, cell_index>> got;
    for (const Cube& q : S.cubes()) got.insert({q.level, q.offset});
    CHECK(got == expect);

    // Packing certificate, exact: strict descendants cover at most half.
    for (std::size_t i = 0; i < S.size(); ++i)
      CHECK(2 * S.covered_cells(i) <= mesh.cells(S.cube(i)).num_cells());
  }
}

TEST_CASE("sparse and dyadic maximal sandwich exactly") {
  Rng rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Mesh mesh = unit_mesh(6);
    std::vector<double> v(64);
    for (double& x : v) x = rng.uniform() < 0.2 ? 0.0 : rng.log_uniform(0.05, 20.0);
    v[static_cast<std::size_t>(rng.uniform_int(64))] = 5.0;  // never identically zero
    const CellFunction f{mesh, v};
    const SparseFamily S = build_sparse(f, 4.0, mesh.top_cube());
    const CellFunction ms = sparse_M(S, f);
    const CellFunction md = dyadic_maximal(f);
    for (std::size_t i = 0; i < 64; ++i) {
      CHECK(ms.values[i] <= md.values[i]);
      CHECK(md.values[i] <= 4.0 * ms.values[i]);
    }
  }
}

TEST_CASE("sparse family serialization round-trips") {
  const Mesh mesh = unit_mesh(3);
  std::vector<double> v(8, 1.0);
  v[0] = 50.0;
  v[7] = 90.0;
  const SparseFamily S = build_sparse(CellFunction{mesh, v}, 4.0, mesh.top_cube());
  const std::string json = sparse_to_json(S);

  const nlohmann::json parsed = nlohmann::json::parse(json);
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == S.size());
  CHECK(parsed[0].at("level").get<int>() == 3);  // members are listed largest-first
  CHECK(parsed[0].at("offset").get<std::int64_t>() == 0);

  const SparseFamily back = sparse_from_json(mesh, json);
  REQUIRE(back.size() == S.size());
  for (std::size_t i = 0; i < S.size(); ++i) CHECK(back.cube(i) == S.cube(i));
}
