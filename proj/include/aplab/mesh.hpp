#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace aplab {

using cell_index = std::int64_t;

/// Half-open run of mesh cells [start_cell, end_cell).
struct Interval {
  cell_index start_cell = 0;
  cell_index end_cell = 0;

  cell_index num_cells() const { return end_cell - start_cell; }
  bool operator==(const Interval&) const = default;
};

/// Identity of a dyadic cube: at `level` k it covers the 2^k consecutive
/// cells starting at offset*2^k. Geometry is always derived from the mesh,
/// never stored, so equality and containment stay exact.
struct Cube {
  int level = 0;
  std::int64_t offset = 0;

  bool operator==(const Cube&) const = default;
};

enum class SupScope { Dyadic, AllIntervals };

/// Uniform one-dimensional mesh of 2^levels equal cells starting at `origin`.
/// All dyadic bookkeeping (cube <-> cell ranges, parents, children,
/// enumeration orders) lives here so the rest of the code can work in exact
/// integer cell arithmetic.
class Mesh {
 public:
  /// Default: the single unit cell [0, 1).
  Mesh() : Mesh(0.0, 1.0, 0) {}
  Mesh(double origin, double cell_width, int levels);

  double origin() const { return origin_; }
  double cell_width() const { return cell_width_; }
  int levels() const { return levels_; }
  cell_index num_cells() const { return cell_index{1} << levels_; }

  double cell_left(cell_index i) const { return origin_ + static_cast<double>(i) * cell_width_; }
  double cell_right(cell_index i) const { return cell_left(i + 1); }

  Cube top_cube() const { return Cube{levels_, 0}; }
  Interval whole() const { return Interval{0, num_cells()}; }
  Interval cells(Cube q) const;
  double length(Interval r) const { return static_cast<double>(r.num_cells()) * cell_width_; }
  double length(Cube q) const { return length(cells(q)); }

  bool valid(Cube q) const;
  bool valid(Interval r) const;

  // Dyadic tree navigation; children() rejects leaves, parent() the top cube.
  std::pair<Cube, Cube> children(Cube q) const;
  Cube parent(Cube q) const;

  bool contains(Cube outer, Cube inner) const;
  bool contains(Interval outer, Interval inner) const;
  bool contains(Cube outer, Interval inner) const;
  bool contains(Interval outer, Cube inner) const;
  bool contains(Cube q, cell_index cell) const;

  /// All 2^(levels+1) - 1 dyadic cubes, ordered by descending level then
  /// ascending offset. cube_id() gives the position of a cube in this order.
  std::vector<Cube> enumerate_dyadic() const;
  std::size_t cube_count() const { return static_cast<std::size_t>((cell_index{2} << levels_) - 1); }
  std::size_t cube_id(Cube q) const;
  Cube cube_from_id(std::size_t id) const;

  /// All N(N+1)/2 mesh-aligned intervals, ordered by (start, length).
  std::vector<Interval> enumerate_intervals() const;

  bool operator==(const Mesh&) const = default;

 private:
  double origin_;
  double cell_width_;
  int levels_;
};

}  // namespace aplab
