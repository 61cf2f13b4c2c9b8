#pragma once

#include <cstdint>

#include "aplab/characteristics.hpp"
#include "aplab/maximal.hpp"
#include "aplab/sparse.hpp"
#include "aplab/weight.hpp"

namespace aplab {

enum class TestingDirection { Forward, Dual };

/// Testing constant of the sparse sum operator over dyadic test cubes R:
/// forward is sup_R sigma(R)^{-1/p} (int_R (T^{S(R)} sigma)^p w)^{1/p}; dual
/// swaps the roles of w and sigma and replaces p by its conjugate. Computed
/// level by level in O(N log N + sum of member sizes).
SupremumResult testing_T(const SparseFamily& S, const WeightPair& pair, TestingDirection dir);

/// Testing constant of the maximal operator over dyadic R at exponent p:
/// sup_R ((int_R M(chi_R sigma)^p w) / sigma(R))^{1/p}, with the maximal
/// function restricted to R supplied by the bottom-up sweep.
SupremumResult testing_M(const WeightPair& pair, double p);

/// (int |f|^p w)^{1/p} over the whole mesh.
double weighted_lp_norm(const CellFunction& f, const Weight& w, double p);

/// Weak L^p(w) quasi-norm sup_{lambda>0} lambda * w({|g| > lambda})^{1/p},
/// evaluated exactly as the max over distinct positive values v of |g| of
/// v * w({|g| >= v})^{1/p} (the sup is attained in the limit lambda -> v-).
double weak_lp_quasinorm(const CellFunction& g, const Weight& w, double p);

/// Rayleigh ratio ||T^S(f sigma)||_{L^p(w)} / ||f||_{L^p(sigma)} (0 when the
/// denominator vanishes). The single evaluation path used by norm_estimate,
/// so re-evaluating a witness reproduces its bound exactly.
double sparse_rayleigh(const SparseFamily& S, const WeightPair& pair, const CellFunction& f);

struct NormEstimate {
  double lower_bound = 0.0;
  CellFunction witness;
  std::int64_t iterations = 0;
  bool converged = false;
};

/// Start-set selection for norm_estimate. power() iterates from all-ones
/// only; restarts(k) adds k random positive starts plus the deterministic
/// witnesses (every dyadic indicator and its dual transfer), which make the
/// estimate at least the larger testing constant.
struct NormMethod {
  int random_starts = 16;
  bool include_witnesses = true;

  static NormMethod power() { return {0, false}; }
  static NormMethod restarts(int k) { return {k, true}; }
};

/// Lower bound for ||T^S(. sigma)||_{L^p(sigma) -> L^p(w)} by the fixed-point
/// ascent f <- (T^S(w (T^S(f sigma))^{p-1}))^{1/(p-1)}, tracking the best
/// Rayleigh ratio ever seen. Each start stops when the ratio moves by less
/// than 1e-10 relative or after 10^4 steps. Deterministic given the seed,
/// independent of thread count.
NormEstimate norm_estimate(const SparseFamily& S, const WeightPair& pair,
                           NormMethod method = NormMethod::restarts(16), std::uint64_t seed = 0);

struct InterpolationExponents {
  double p = 0.0;
  double q = 0.0;
  double eps = 0.0;    // p - q
  double theta = 0.0;  // solves 1/p = theta/(p-eps) + (1-theta)/(p+eps)
};

/// Closed-form interpolation exponents for 1 <= q < p; both defining
/// identities (the second read through 1/x' = 1 - 1/x, so the q = 1 endpoint
/// stays finite) are re-verified to 1e-12 before returning.
InterpolationExponents interpolation_theta(double p, double q);

}  // namespace aplab
