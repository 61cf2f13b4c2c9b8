#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aplab/characteristics.hpp"
#include "aplab/weight.hpp"

namespace aplab {

/// Least-squares fit of log(value) against log(1/delta).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

/// Requires >= 3 points, distinct deltas in (0,1), strictly positive values.
SlopeFit fit_slope(std::span<const double> deltas, std::span<const double> values);

/// The seven bounds that take no extra parameter, in canonical column order.
std::vector<BoundId> default_sweep_bounds();

struct SweepConfig {
  double p = 3.0;
  double alpha = 0.4;
  std::vector<double> deltas;  // geometric grid, e.g. 2^-4 .. 2^-12
  int levels = 14;             // mesh cells = 2^levels; convergence probe at levels + 1
  std::vector<BoundId> bounds = default_sweep_bounds();
  double tau = 4.0;  // stopping factor for the testing-column family
  std::uint64_t seed = 0;
};

struct SweepRow {
  double delta = 0.0;
  std::vector<double> values;  // aligned with SweepReport::columns
  bool converged = true;       // every column moved < 1% under mesh doubling
  double max_rel_change = 0.0;
};

struct SweepReport {
  SweepConfig config;
  bool observation = false;           // which example family produced the rows
  std::vector<std::string> columns;   // value columns (delta excluded)
  std::vector<SweepRow> rows;
  std::map<std::string, SlopeFit> slopes;  // per column
  bool all_converged = true;
};

/// Two-singularity example sweep: one row per delta with the global Ap
/// constant, both Fujii-Wilson constants, every configured bound, and the
/// forward/dual testing constants of the tau-stopping family of w. Every
/// column is recomputed on a doubled mesh; rows whose values move by >= 1%
/// are flagged (never dropped). Requires p > 2 and 1/p < alpha < 1/2.
SweepReport run_sweep(const SweepConfig& config);

/// Single-power example sweep: same layout with one quantity column
/// `mixed-alpha`, the one-supremum (Ap)^alpha (Ainf-exp)^(1-alpha) constant.
/// Requires p > 1 and alpha in (0, 1].
SweepReport run_observation_sweep(const SweepConfig& config);
SweepReport run_observation_sweep(double p, double alpha, std::span<const double> deltas,
                                  int levels = 12);

std::string sweep_to_csv(const SweepReport& report);
std::string sweep_to_json(const SweepReport& report);

enum class CorpusKind { CellAverages, Power, WDelta };

/// Reproducible weight pairs for randomized verification. CellAverages:
/// discrete pairs with log-uniform averages in [e^-3, e^3]; Power: analytic
/// single-power pairs with admissible random exponents; WDelta: instances of
/// the two-singularity family (requires p > 2).
std::vector<WeightPair> random_corpus(std::uint64_t seed, std::size_t size, CorpusKind kind,
                                      int levels, double p);

}  // namespace aplab
