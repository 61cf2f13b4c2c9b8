#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "aplab/mesh.hpp"
#include "aplab/weight.hpp"

namespace aplab {

/// One multiplicative factor of a per-interval quantity. `param` is the r of
/// an A_r factor; 0 means "the pair's own exponent p". A1 / AinfExp / AinfFW
/// ignore it.
enum class Flavor { Ap, A1, AinfExp, AinfFW };

struct Factor {
  Flavor kind = Flavor::Ap;
  double exponent = 1.0;
  double param = 0.0;
};

/// Product of factors evaluated on one interval at a time; a supremum of such
/// a product over intervals is taken inside a single sup (not a product of
/// separate sups).
struct FlavorSpec {
  std::vector<Factor> factors;

  static FlavorSpec ap() { return {{Factor{Flavor::Ap, 1.0, 0.0}}}; }
  static FlavorSpec ar(double r) { return {{Factor{Flavor::Ap, 1.0, r}}}; }
  static FlavorSpec a1() { return {{Factor{Flavor::A1, 1.0, 0.0}}}; }
  static FlavorSpec ainf_exp() { return {{Factor{Flavor::AinfExp, 1.0, 0.0}}}; }
  static FlavorSpec ainf_fw() { return {{Factor{Flavor::AinfFW, 1.0, 0.0}}}; }
  static FlavorSpec product(std::vector<Factor> f) { return {std::move(f)}; }

  bool has_fw() const;
  /// Exponents finite, A_r parameters in (1, inf); throws std::invalid_argument.
  void validate() const;
};

struct SupremumResult {
  double value = 0.0;
  Interval argmax;
  SupScope scope = SupScope::AllIntervals;
};

/// Argmax preference shared by every supremum scan: larger value, then
/// smaller start cell, then shorter interval. A total order, so the winner
/// does not depend on scan order or thread count.
bool sup_candidate_beats(double value_a, Interval a, double value_b, Interval b);

/// 1 + log t for t >= 1; anything smaller is a domain error (the quantities
/// this is applied to are always >= 1).
double phi(double t);

// Per-interval quantities. Cube overloads evaluate on the cube's cells.
double ap_local(const WeightPair& pair, Interval region);
double ap_local(const WeightPair& pair, Cube region);
double ar_local(const WeightPair& pair, double r, Interval region);
double a1_local(const Weight& w, Interval region);
double ainf_exp_local(const Weight& w, Interval region);
double ainf_fw_local(const Weight& w, Interval region);
double mixed_local(const WeightPair& pair, const FlavorSpec& spec, Interval region);

/// Scope a supremum of this spec uses when none is requested: dyadic as soon
/// as a Fujii-Wilson factor is present (each of its evaluations costs
/// O(|Q|^2)), all mesh-aligned intervals otherwise.
SupScope default_scope(const FlavorSpec& spec);

/// Supremum of mixed_local over the scope's search space. Ties take the
/// smallest start cell, then the shortest interval, independent of scan
/// order and thread count.
SupremumResult global_sup(const WeightPair& pair, const FlavorSpec& spec,
                          std::optional<SupScope> scope = std::nullopt);

/// Fujii-Wilson ratio of every dyadic cube in one O(N^2) bottom-up sweep;
/// indexed by Mesh::cube_id.
std::vector<double> fw_all_dyadic(const Weight& w);

/// Supremum of the Fujii-Wilson ratio of a single weight.
SupremumResult global_fw_sup(const Weight& w, SupScope scope = SupScope::Dyadic);

// --- norm-bound right-hand sides --------------------------------------------

enum class BoundId { Buckley, MaxExp0, MaxW, HlMixed, MixedPr, Exp1, Exp0, W0, MixedPq };

std::string_view bound_name(BoundId id);
std::optional<BoundId> bound_from_name(std::string_view name);
const std::vector<BoundId>& all_bounds();
/// True for the two families that take a second exponent (the r of mixed-pr,
/// the q of mixed-pq).
bool bound_needs_param(BoundId id);

/// Numeric value of the named right-hand side, assembled from global suprema
/// of the pair at default scopes. Where a quoted form adds a term to its
/// mirror under (w,p) <-> (sigma,p'), the larger of the two terms is used so
/// the uniform weight scores exactly 1; both readings agree within a factor
/// of 2 and have the same growth.
double bound_value(const WeightPair& pair, BoundId id,
                   std::optional<double> param = std::nullopt);

}  // namespace aplab
