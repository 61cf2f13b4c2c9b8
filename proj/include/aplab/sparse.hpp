#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aplab/maximal.hpp"
#include "aplab/mesh.hpp"

namespace aplab {

/// Collection of dyadic cubes in which the strict sub-members of every cube Q
/// cover at most half of Q (checked exactly in integer cells). Each member
/// keeps an exclusive cell set E_Q = Q minus all strictly smaller members;
/// the E_Q are pairwise disjoint and at least half of Q by the packing bound.
///
/// Members are stored largest-first (level descending, offset ascending), and
/// every cell knows its owner: the smallest member containing it, if any.
class SparseFamily {
 public:
  /// Validates bounds, rejects duplicates, and checks the packing bound
  /// 2 * |covered| <= |Q| for every member; throws std::invalid_argument on
  /// any violation.
  static SparseFamily from_cubes(const Mesh& mesh, std::vector<Cube> cubes);

  const Mesh& mesh() const { return mesh_; }
  std::size_t size() const { return cubes_.size(); }
  const std::vector<Cube>& cubes() const { return cubes_; }
  Cube cube(std::size_t i) const { return cubes_[i]; }

  /// Index of the smallest member strictly containing member i; -1 if none.
  std::int64_t parent_index(std::size_t i) const { return parent_[i]; }
  /// Number of cells of member i covered by strictly smaller members.
  cell_index covered_cells(std::size_t i) const { return covered_[i]; }
  /// |E_i| = |Q_i| - covered_cells(i).
  cell_index exclusive_size(std::size_t i) const;
  std::vector<cell_index> exclusive_cells(std::size_t i) const;

  /// Index of the smallest member containing the cell; -1 outside the family.
  std::int64_t owner(cell_index cell) const { return owner_[static_cast<std::size_t>(cell)]; }

  std::optional<std::size_t> index_of(Cube q) const;

 private:
  SparseFamily(Mesh mesh, std::vector<Cube> cubes);

  Mesh mesh_;
  std::vector<Cube> cubes_;
  std::vector<std::int64_t> parent_;
  std::vector<cell_index> covered_;
  std::vector<std::int64_t> owner_;
};

/// Principal-cube construction: the root is a member, and the children of a
/// member P are the maximal dyadic cubes Q strictly inside P whose average of
/// f exceeds tau times P's average. tau > 2 makes the covered fraction of
/// every member at most 1/tau < 1/2. Requires f >= 0 and f not identically
/// zero on the root.
SparseFamily build_sparse(const CellFunction& f, double tau, Cube root);

/// out[i] = average of f over the owner of cell i (0 where no member covers
/// the cell). Averages share build_sparse's arithmetic, so the two-sided
/// comparison with the dyadic maximal holds exactly.
CellFunction sparse_M(const SparseFamily& S, const CellFunction& f);

/// out[i] = sum of averages of f over all members containing cell i,
/// restricted to members inside `restrict_to` when given.
CellFunction sparse_T(const SparseFamily& S, const CellFunction& f,
                      std::optional<Cube> restrict_to = std::nullopt);

/// JSON list of {"level": k, "offset": m}, members largest-first; loading
/// runs the full from_cubes validation.
std::string sparse_to_json(const SparseFamily& S);
SparseFamily sparse_from_json(const Mesh& mesh, const std::string& text);

}  // namespace aplab
