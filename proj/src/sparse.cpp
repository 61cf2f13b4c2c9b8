#include "aplab/sparse.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace aplab {

namespace {

void check_cube(const Mesh& mesh, Cube q) {
  if (q.level < 0 || q.level > mesh.levels())
    throw std::invalid_argument("family cube level outside the mesh");
  if (q.offset < 0 || q.offset >= (cell_index{1} << (mesh.levels() - q.level)))
    throw std::invalid_argument("family cube offset outside the mesh");
}

}  // namespace

SparseFamily::SparseFamily(Mesh mesh, std::vector<Cube> cubes)
    : mesh_(std::move(mesh)), cubes_(std::move(cubes)) {
  std::sort(cubes_.begin(), cubes_.end(), [](Cube a, Cube b) {
    if (a.level != b.level) return a.level > b.level;
    return a.offset < b.offset;
  });
  for (std::size_t i = 1; i < cubes_.size(); ++i)
    if (cubes_[i] == cubes_[i - 1]) throw std::invalid_argument("duplicate family cube");

  owner_.assign(static_cast<std::size_t>(mesh_.num_cells()), -1);
  for (std::size_t i = 0; i < cubes_.size(); ++i) {
    const Interval r = mesh_.cells(cubes_[i]);
    for (cell_index c = r.start_cell; c < r.end_cell; ++c)
      owner_[static_cast<std::size_t>(c)] = static_cast<std::int64_t>(i);
  }

  // Smallest strictly-containing member, found by walking up the dyadic tree.
  std::unordered_map<std::size_t, std::size_t> by_id;
  for (std::size_t i = 0; i < cubes_.size(); ++i) by_id.emplace(mesh_.cube_id(cubes_[i]), i);
  parent_.assign(cubes_.size(), -1);
  covered_.assign(cubes_.size(), 0);
  for (std::size_t i = 0; i < cubes_.size(); ++i) {
    Cube q = cubes_[i];
    while (q.level < mesh_.levels()) {
      q = mesh_.parent(q);
      auto it = by_id.find(mesh_.cube_id(q));
      if (it != by_id.end()) {
        parent_[i] = static_cast<std::int64_t>(it->second);
        covered_[it->second] += mesh_.cells(cubes_[i]).num_cells();
        break;
      }
    }
  }
}

SparseFamily SparseFamily::from_cubes(const Mesh& mesh, std::vector<Cube> cubes) {
  for (Cube q : cubes) check_cube(mesh, q);
  SparseFamily fam(mesh, std::move(cubes));
  for (std::size_t i = 0; i < fam.cubes_.size(); ++i) {
    const cell_index size = fam.mesh_.cells(fam.cubes_[i]).num_cells();
    if (2 * fam.covered_[i] > size)
      throw std::invalid_argument("family cube has more than half its cells inside sub-members");
  }
  return fam;
}

cell_index SparseFamily::exclusive_size(std::size_t i) const {
  return mesh_.cells(cubes_[i]).num_cells() - covered_[i];
}

std::vector<cell_index> SparseFamily::exclusive_cells(std::size_t i) const {
  std::vector<cell_index> out;
  const Interval r = mesh_.cells(cubes_[i]);
  for (cell_index c = r.start_cell; c < r.end_cell; ++c)
    if (owner_[static_cast<std::size_t>(c)] == static_cast<std::int64_t>(i)) out.push_back(c);
  return out;
}

std::optional<std::size_t> SparseFamily::index_of(Cube q) const {
  auto it = std::find(cubes_.begin(), cubes_.end(), q);
  if (it == cubes_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - cubes_.begin());
}

SparseFamily build_sparse(const CellFunction& f, double tau, Cube root) {
  const Mesh& mesh = f.mesh;
  if (static_cast<cell_index>(f.values.size()) != mesh.num_cells())
    throw std::invalid_argument("function data must match the mesh size");
  if (!(tau > 2.0)) throw std::invalid_argument("stopping factor must exceed 2");
  check_cube(mesh, root);
  if (!f.nonnegative())
    throw std::invalid_argument("stopping-time construction requires a nonnegative function");

  const std::span<const double> v(f.values);
  const std::vector<double> prefix = prefix_sums(v);
  const auto avg_of = [&](Cube q) {
    const Interval r = mesh.cells(q);
    return run_average(prefix, v, r.start_cell, r.end_cell);
  };
  if (!(avg_of(root) > 0.0))
    throw std::invalid_argument("stopping-time construction requires a function that is not identically zero on the root");

  std::vector<Cube> members;
  std::vector<Cube> pending{root};
  std::vector<Cube> walk;
  while (!pending.empty()) {
    const Cube p = pending.back();
    pending.pop_back();
    members.push_back(p);
    if (p.level == 0) continue;
    const double threshold = tau * avg_of(p);
    cell_index taken = 0;
    walk.clear();
    auto [left, right] = mesh.children(p);
    walk.push_back(right);
    walk.push_back(left);
    while (!walk.empty()) {
      const Cube q = walk.back();
      walk.pop_back();
      if (avg_of(q) > threshold) {
        pending.push_back(q);
        taken += mesh.cells(q).num_cells();
      } else if (q.level > 0) {
        auto [ql, qr] = mesh.children(q);
        walk.push_back(qr);
        walk.push_back(ql);
      }
    }
    if (static_cast<double>(taken) * tau > static_cast<double>(mesh.cells(p).num_cells()))
      throw std::logic_error("stopping children exceed the packing budget");
  }
  return SparseFamily::from_cubes(mesh, std::move(members));
}

CellFunction sparse_M(const SparseFamily& S, const CellFunction& f) {
  const Mesh& mesh = f.mesh;
  if (mesh != S.mesh()) throw std::invalid_argument("function and family meshes differ");
  if (static_cast<cell_index>(f.values.size()) != mesh.num_cells())
    throw std::invalid_argument("function data must match the mesh size");
  const std::span<const double> v(f.values);
  const std::vector<double> prefix = prefix_sums(v);
  std::vector<double> avg(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Interval r = mesh.cells(S.cube(i));
    avg[i] = run_average(prefix, v, r.start_cell, r.end_cell);
  }
  std::vector<double> out(f.values.size(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    const std::int64_t o = S.owner(static_cast<cell_index>(c));
    if (o >= 0) out[c] = avg[static_cast<std::size_t>(o)];
  }
  return CellFunction{mesh, std::move(out)};
}

CellFunction sparse_T(const SparseFamily& S, const CellFunction& f,
                      std::optional<Cube> restrict_to) {
  const Mesh& mesh = f.mesh;
  if (mesh != S.mesh()) throw std::invalid_argument("function and family meshes differ");
  if (static_cast<cell_index>(f.values.size()) != mesh.num_cells())
    throw std::invalid_argument("function data must match the mesh size");
  if (restrict_to) check_cube(mesh, *restrict_to);
  const std::span<const double> v(f.values);
  const std::vector<double> prefix = prefix_sums(v);
  std::vector<double> out(f.values.size(), 0.0);
  for (std::size_t i = 0; i < S.size(); ++i) {
    const Cube q = S.cube(i);
    if (restrict_to && !mesh.contains(*restrict_to, q)) continue;
    const Interval r = mesh.cells(q);
    const double a = run_average(prefix, v, r.start_cell, r.end_cell);
    for (cell_index c = r.start_cell; c < r.end_cell; ++c) out[static_cast<std::size_t>(c)] += a;
  }
  return CellFunction{mesh, std::move(out)};
}

std::string sparse_to_json(const SparseFamily& S) {
  nlohmann::json arr = nlohmann::json::array();
  for (Cube q : S.cubes()) arr.push_back({{"level", q.level}, {"offset", q.offset}});
  return arr.dump(2) + "\n";
}

SparseFamily sparse_from_json(const Mesh& mesh, const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_array()) throw std::invalid_argument("family JSON must be a list of cubes");
  std::vector<Cube> cubes;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("level") || !e.contains("offset"))
      throw std::invalid_argument("family JSON entries need level and offset");
    cubes.push_back(Cube{e.at("level").get<int>(), e.at("offset").get<cell_index>()});
  }
  return SparseFamily::from_cubes(mesh, std::move(cubes));
}

}  // namespace aplab
