#include "aplab/mesh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aplab {

Mesh::Mesh(double origin, double cell_width, int levels)
    : origin_(origin), cell_width_(cell_width), levels_(levels) {
  if (!std::isfinite(origin)) throw std::invalid_argument("mesh origin must be finite");
  if (!(cell_width > 0.0) || !std::isfinite(cell_width))
    throw std::invalid_argument("cell width must be positive and finite");
  if (levels < 0 || levels > 40) throw std::invalid_argument("mesh levels must be in [0, 40]");
}

Interval Mesh::cells(Cube q) const {
  if (!valid(q)) throw std::domain_error("cube does not belong to this mesh");
  const cell_index size = cell_index{1} << q.level;
  return Interval{q.offset * size, (q.offset + 1) * size};
}

bool Mesh::valid(Cube q) const {
  if (q.level < 0 || q.level > levels_) return false;
  const std::int64_t count = std::int64_t{1} << (levels_ - q.level);
  return q.offset >= 0 && q.offset < count;
}

bool Mesh::valid(Interval r) const {
  return r.start_cell >= 0 && r.start_cell < r.end_cell && r.end_cell <= num_cells();
}

std::pair<Cube, Cube> Mesh::children(Cube q) const {
  if (!valid(q)) throw std::domain_error("cube does not belong to this mesh");
  if (q.level == 0) throw std::domain_error("leaf cube has no children");
  return {Cube{q.level - 1, 2 * q.offset}, Cube{q.level - 1, 2 * q.offset + 1}};
}

Cube Mesh::parent(Cube q) const {
  if (!valid(q)) throw std::domain_error("cube does not belong to this mesh");
  if (q.level == levels_) throw std::domain_error("top cube has no parent");
  return Cube{q.level + 1, q.offset / 2};
}

bool Mesh::contains(Cube outer, Cube inner) const {
  return contains(cells(outer), cells(inner));
}

bool Mesh::contains(Interval outer, Interval inner) const {
  if (!valid(outer) || !valid(inner)) throw std::domain_error("interval does not belong to this mesh");
  return outer.start_cell <= inner.start_cell && inner.end_cell <= outer.end_cell;
}

bool Mesh::contains(Cube outer, Interval inner) const { return contains(cells(outer), inner); }

bool Mesh::contains(Interval outer, Cube inner) const { return contains(outer, cells(inner)); }

bool Mesh::contains(Cube q, cell_index cell) const {
  const Interval r = cells(q);
  return r.start_cell <= cell && cell < r.end_cell;
}

std::vector<Cube> Mesh::enumerate_dyadic() const {
  std::vector<Cube> out;
  out.reserve(cube_count());
  for (int level = levels_; level >= 0; --level) {
    const std::int64_t count = std::int64_t{1} << (levels_ - level);
    for (std::int64_t offset = 0; offset < count; ++offset) out.push_back(Cube{level, offset});
  }
  return out;
}

std::size_t Mesh::cube_id(Cube q) const {
  if (!valid(q)) throw std::domain_error("cube does not belong to this mesh");
  // Cubes above level q.level: 2^(L - level') summed for level' in (q.level, L].
  const std::int64_t before = (std::int64_t{1} << (levels_ - q.level)) - 1;
  return static_cast<std::size_t>(before + q.offset);
}

Cube Mesh::cube_from_id(std::size_t id) const {
  if (id >= cube_count()) throw std::domain_error("cube id out of range");
  int level = levels_;
  std::int64_t rest = static_cast<std::int64_t>(id);
  while (rest >= (std::int64_t{1} << (levels_ - level))) {
    rest -= std::int64_t{1} << (levels_ - level);
    --level;
  }
  return Cube{level, rest};
}

std::vector<Interval> Mesh::enumerate_intervals() const {
  std::vector<Interval> out;
  const cell_index n = num_cells();
  out.reserve(static_cast<std::size_t>(n * (n + 1) / 2));
  for (cell_index s = 0; s < n; ++s)
    for (cell_index e = s + 1; e <= n; ++e) out.push_back(Interval{s, e});
  return out;
}

}  // namespace aplab
