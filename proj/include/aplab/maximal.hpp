#pragma once

#include <functional>
#include <span>
#include <vector>

#include "aplab/mesh.hpp"
#include "aplab/weight.hpp"

namespace aplab {

/// Piecewise-constant function: one value per mesh cell.
struct CellFunction {
  Mesh mesh;
  std::vector<double> values;

  /// True when every cell value is >= 0; derived from the data on demand so
  /// it can never disagree with it.
  bool nonnegative() const {
    for (double x : values)
      if (!(x >= 0.0)) return false;
    return true;
  }
};

/// Plain forward prefix sums (P[0] = 0, P[i+1] = P[i] + v[i]). Every operator
/// that compares averages of the same data builds them through here, so equal
/// averages come out bitwise identical and exact pointwise comparisons hold.
std::vector<double> prefix_sums(std::span<const double> v);

/// Average of v over cells [s, e) from its prefix sums; a singleton run reads
/// the value directly, matching the candidates the maximal operators use, so
/// cross-operator comparisons of the same run are bitwise exact.
inline double run_average(std::span<const double> prefix, std::span<const double> v,
                          cell_index s, cell_index e) {
  if (e - s == 1) return v[static_cast<std::size_t>(s)];
  return (prefix[static_cast<std::size_t>(e)] - prefix[static_cast<std::size_t>(s)]) /
         static_cast<double>(e - s);
}

/// Maximal operator over all mesh-aligned intervals:
/// out[i] = max over intervals I with i in I, of the average of |f| on I.
CellFunction maximal_mesh(const CellFunction& f);

/// Maximal over dyadic ancestor cubes only (the cell itself included).
CellFunction dyadic_maximal(const CellFunction& f);

/// Weighted dyadic maximal: sup over dyadic ancestors Q of (1/w(Q)) int_Q |f| w.
CellFunction weighted_dyadic_maximal(const CellFunction& f, const Weight& w);

/// Geometric maximal: sup over regions of exp(average of log f); f > 0.
CellFunction geometric_maximal(const CellFunction& f, SupScope scope);

/// Bottom-up sweep over the dyadic tree. For every cube R (leaves first,
/// root last) it exposes the restricted maximal function
///   maxfun_R[i] = max{ avg of v over I : I mesh interval, i in I, I inside R }
/// on R's cells. A cube's maxfun is built from its children's by adding the
/// intervals that cross the midpoint, so the whole sweep costs O(N^2) and the
/// root visit is the unrestricted maximal function. Visits are sequential in
/// (level asc, offset asc) order.
void dyadic_restricted_maximal_sweep(
    const Mesh& mesh, std::span<const double> v,
    const std::function<void(Cube, std::span<const double>)>& visit);

/// Restricted maximal function on one cell range [s, e) of v (indices into
/// the full array); out[i - s] covers subintervals of [s, e) only.
std::vector<double> range_maximal(std::span<const double> v, cell_index s, cell_index e);

}  // namespace aplab
