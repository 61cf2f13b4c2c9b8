#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aplab/mesh.hpp"

namespace aplab {

/// Power-law factor |x - singularity|^gamma on a cell-aligned support.
/// gamma > -1 keeps cell masses finite; the singularity must sit on a cell
/// boundary so no cell ever straddles it.
struct PowerPiece {
  double gamma = 0.0;
  double singularity = 0.0;
  Interval support;
};

/// Closed-form weight description: a positive background constant overridden
/// by power pieces with disjoint supports. Cell masses and log-masses come
/// from antiderivatives, so they stay exact even where the weight blows up
/// or vanishes at a piece boundary. pow() raises the whole description to a
/// real exponent (how dual weights are derived without losing exactness).
struct WeightModel {
  double background = 1.0;
  std::vector<PowerPiece> pieces;

  WeightModel pow(double t) const;
};

/// Weight on a mesh, stored as per-cell averages of w and of log w together
/// with their prefix sums; every interval average / log-average is O(1).
/// Averages over cell runs use cell counts (equal widths cancel), so a
/// constant weight has exactly representable averages.
class Weight {
 public:
  static Weight from_cell_averages(const Mesh& mesh, std::span<const double> averages);
  static Weight from_cell_data(const Mesh& mesh, std::vector<double> averages,
                               std::vector<double> log_averages);
  static Weight from_model(const Mesh& mesh, const WeightModel& model);
  static Weight uniform(const Mesh& mesh, double c);
  static Weight power(const Mesh& mesh, const PowerPiece& piece);

  const Mesh& mesh() const { return mesh_; }
  cell_index num_cells() const { return mesh_.num_cells(); }

  double cell_average(cell_index i) const { return avg_[static_cast<std::size_t>(i)]; }
  double cell_log_average(cell_index i) const { return log_avg_[static_cast<std::size_t>(i)]; }
  std::span<const double> averages() const { return avg_; }
  std::span<const double> log_averages() const { return log_avg_; }

  /// prefix_avg(i) = sum of cell averages over cells [0, i); same for logs.
  double prefix_avg(cell_index i) const { return pre_avg_[static_cast<std::size_t>(i)]; }
  double prefix_log(cell_index i) const { return pre_log_[static_cast<std::size_t>(i)]; }

  double average(Interval r) const;      // (1/|r|) int_r w
  double log_average(Interval r) const;  // (1/|r|) int_r log w
  double integral(Interval r) const;     // w(r)
  double average(Cube q) const { return average(mesh_.cells(q)); }
  double log_average(Cube q) const { return log_average(mesh_.cells(q)); }
  double integral(Cube q) const { return integral(mesh_.cells(q)); }
  double min_cell_average(Interval r) const;

 private:
  Weight(const Mesh& mesh, std::vector<double> avg, std::vector<double> log_avg);

  Mesh mesh_;
  std::vector<double> avg_;
  std::vector<double> log_avg_;
  std::vector<double> pre_avg_;
  std::vector<double> pre_log_;
  // Residual of each stored prefix against the extended-precision running
  // sum. average()/log_average() add the residual difference back, so an
  // interval average keeps ~1e-16 relative accuracy even when the prefix
  // difference cancels almost completely (tiny cells after huge ones).
  std::vector<double> pre_avg_c_;
  std::vector<double> pre_log_c_;
};

enum class PairMode { Discrete, Analytic };

/// (w, sigma, p) with sigma = w^{1-p'} the dual weight, 1 < p < inf.
/// Discrete pairs raise cell averages to the dual power (the weight is taken
/// as literally piecewise constant); analytic pairs re-derive exact cell data
/// from the closed-form model. dual_view() swaps the roles (sigma, w, p')
/// without any recomputation, preserving exactness in both modes.
class WeightPair {
 public:
  static WeightPair discrete(Weight w, double p);
  static WeightPair analytic(const Mesh& mesh, const WeightModel& model, double p);

  WeightPair dual_view() const;

  double p() const { return p_; }
  double p_conj() const { return pc_; }
  const Weight& w() const { return w_; }
  const Weight& sigma() const { return sigma_; }
  const Mesh& mesh() const { return w_.mesh(); }
  PairMode mode() const { return mode_; }
  const std::optional<WeightModel>& model() const { return model_; }

  /// Dual of w at a general exponent r > 1 (w^{-1/(r-1)}), for A_r factors.
  Weight dual_at(double r) const;

 private:
  WeightPair(double p, Weight w, Weight sigma, PairMode mode, std::optional<WeightModel> model,
             std::optional<WeightModel> sigma_model);

  double p_, pc_;
  Weight w_, sigma_;
  PairMode mode_;
  std::optional<WeightModel> model_, sigma_model_;
};

double conjugate_exponent(double p);

/// Two-singularity example family on a padded mesh over [-1, 2^k - 1):
/// |x|^{(p-1)(1-delta)} near the origin, |x - s2|^{delta - 1} on [s2-1, s2+1]
/// with s2 the nearest cell boundary to delta^{-alpha} + 1, and 1 elsewhere.
/// Requires p > 2, delta in (0,1), alpha in (1/p, 1/2).
struct WDeltaExample {
  Mesh mesh;
  WeightPair pair;
  double s2;
  double p, delta, alpha;
};

WDeltaExample example_wdelta(double p, double delta, double alpha, int levels);

/// Single power weight |x|^{(p-1)(1-delta)} on [-1, 1); the family whose
/// mixed constants scale like delta^{-alpha(p-1)}.
WeightPair observation_pair(double p, double delta, int levels);

// --- serialization ---------------------------------------------------------
// CSV: header "cell_index,average", one row per cell, 12 significant digits.
// JSON: {"origin":..., "cell_width":..., "num_cells":..., "averages":[...]},
// 17 significant digits. Imported weights are piecewise constant.
std::string weight_to_csv(const Weight& w);
Weight weight_from_csv(const Mesh& mesh, const std::string& text);
std::string weight_to_json(const Weight& w);
Weight weight_from_json(const std::string& text);

}  // namespace aplab
