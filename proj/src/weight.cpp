#include "aplab/weight.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "aplab/numfmt.hpp"

namespace aplab {

namespace {

// Antiderivative of log: int log(u) du = u log u - u, continuous down to 0.
double xlogx_minus_x(double t) {
  if (t == 0.0) return 0.0;
  return t * (std::log(t) - 1.0);
}

}  // namespace

// --- Weight -----------------------------------------------------------------

Weight::Weight(const Mesh& mesh, std::vector<double> avg, std::vector<double> log_avg)
    : mesh_(mesh), avg_(std::move(avg)), log_avg_(std::move(log_avg)) {
  const std::size_t n = static_cast<std::size_t>(mesh_.num_cells());
  if (avg_.size() != n || log_avg_.size() != n)
    throw std::invalid_argument("weight cell data must match the mesh size");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(avg_[i] > 0.0) || !std::isfinite(avg_[i]))
      throw std::invalid_argument("weight cell averages must be positive and finite");
    if (!std::isfinite(log_avg_[i]))
      throw std::invalid_argument("weight log data must be finite");
  }
  pre_avg_.resize(n + 1);
  pre_log_.resize(n + 1);
  pre_avg_c_.resize(n + 1);
  pre_log_c_.resize(n + 1);
  pre_avg_[0] = pre_log_[0] = pre_avg_c_[0] = pre_log_c_[0] = 0.0;
  // Accumulate in extended precision and keep each stored prefix's rounding
  // residual, then guard against accumulation bugs with a direct sum.
  long double acc_avg = 0.0L, acc_log = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    acc_avg += avg_[i];
    acc_log += log_avg_[i];
    pre_avg_[i + 1] = static_cast<double>(acc_avg);
    pre_log_[i + 1] = static_cast<double>(acc_log);
    pre_avg_c_[i + 1] = static_cast<double>(acc_avg - static_cast<long double>(pre_avg_[i + 1]));
    pre_log_c_[i + 1] = static_cast<double>(acc_log - static_cast<long double>(pre_log_[i + 1]));
  }
  const double scale_a = std::max(1.0, std::abs(static_cast<double>(acc_avg)));
  const double scale_l = std::max(1.0, std::abs(static_cast<double>(acc_log)));
  if (std::abs(pre_avg_[n] - static_cast<double>(acc_avg)) > 1e-12 * scale_a ||
      std::abs(pre_log_[n] - static_cast<double>(acc_log)) > 1e-12 * scale_l)
    throw std::runtime_error("weight prefix sums failed the direct-summation check");
}

Weight Weight::from_cell_averages(const Mesh& mesh, std::span<const double> averages) {
  std::vector<double> avg(averages.begin(), averages.end());
  std::vector<double> log_avg(avg.size());
  for (std::size_t i = 0; i < avg.size(); ++i) {
    if (!(avg[i] > 0.0) || !std::isfinite(avg[i]))
      throw std::invalid_argument("weight cell averages must be positive and finite");
    log_avg[i] = std::log(avg[i]);
  }
  return Weight(mesh, std::move(avg), std::move(log_avg));
}

Weight Weight::from_cell_data(const Mesh& mesh, std::vector<double> averages,
                              std::vector<double> log_averages) {
  return Weight(mesh, std::move(averages), std::move(log_averages));
}

Weight Weight::uniform(const Mesh& mesh, double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("uniform weight level must be positive and finite");
  std::vector<double> avg(static_cast<std::size_t>(mesh.num_cells()), c);
  std::vector<double> log_avg(avg.size(), std::log(c));
  return Weight(mesh, std::move(avg), std::move(log_avg));
}

Weight Weight::power(const Mesh& mesh, const PowerPiece& piece) {
  WeightModel model;
  model.pieces.push_back(piece);
  return from_model(mesh, model);
}

Weight Weight::from_model(const Mesh& mesh, const WeightModel& model) {
  if (!(model.background > 0.0) || !std::isfinite(model.background))
    throw std::invalid_argument("weight background must be positive and finite");
  const std::size_t n = static_cast<std::size_t>(mesh.num_cells());
  std::vector<double> avg(n, model.background);
  std::vector<double> log_avg(n, std::log(model.background));
  std::vector<bool> taken(n, false);
  const double h = mesh.cell_width();

  for (const PowerPiece& piece : model.pieces) {
    if (!(piece.gamma > -1.0)) throw std::invalid_argument("gamma must exceed -1");
    if (!mesh.valid(piece.support)) throw std::invalid_argument("power piece support is not on the mesh");
    const double rel = (piece.singularity - mesh.origin()) / h;
    const cell_index s_idx = static_cast<cell_index>(std::llround(rel));
    if (std::abs(rel - static_cast<double>(s_idx)) > 1e-9)
      throw std::invalid_argument("singularity must lie on a cell boundary");
    for (cell_index i = piece.support.start_cell; i < piece.support.end_cell; ++i) {
      if (taken[static_cast<std::size_t>(i)])
        throw std::invalid_argument("power pieces must have disjoint supports");
      taken[static_cast<std::size_t>(i)] = true;
      // Distances to the singularity in exact integer-times-width form; the
      // cell is entirely on one side because s sits on a boundary.
      double u0, u1;
      if (i >= s_idx) {
        u0 = static_cast<double>(i - s_idx) * h;
        u1 = static_cast<double>(i + 1 - s_idx) * h;
      } else {
        u0 = static_cast<double>(s_idx - i - 1) * h;
        u1 = static_cast<double>(s_idx - i) * h;
      }
      const double g1 = piece.gamma + 1.0;
      const double mass = (std::pow(u1, g1) - std::pow(u0, g1)) / g1;
      const double log_mass = piece.gamma * (xlogx_minus_x(u1) - xlogx_minus_x(u0));
      const double a = mass / h;
      if (!(a > 0.0) || !std::isfinite(a) || !std::isfinite(log_mass))
        throw std::invalid_argument("power piece produces a non-positive or non-finite cell");
      avg[static_cast<std::size_t>(i)] = a;
      log_avg[static_cast<std::size_t>(i)] = log_mass / h;
    }
  }
  return Weight(mesh, std::move(avg), std::move(log_avg));
}

double Weight::average(Interval r) const {
  if (!mesh_.valid(r)) throw std::domain_error("interval does not belong to this mesh");
  // Singleton runs read the stored average directly (matching run_average's
  // policy so cross-operator comparisons stay exact); longer runs take the
  // compensated prefix difference. When the difference cancels, the leading
  // subtraction is exact (Sterbenz) and the residual difference restores the
  // lost digits, so the result keeps ~1e-16 relative accuracy throughout.
  if (r.num_cells() == 1) return avg_[static_cast<std::size_t>(r.start_cell)];
  const std::size_t e = static_cast<std::size_t>(r.end_cell);
  const std::size_t s = static_cast<std::size_t>(r.start_cell);
  return ((pre_avg_[e] - pre_avg_[s]) + (pre_avg_c_[e] - pre_avg_c_[s])) /
         static_cast<double>(r.num_cells());
}

double Weight::log_average(Interval r) const {
  if (!mesh_.valid(r)) throw std::domain_error("interval does not belong to this mesh");
  if (r.num_cells() == 1) return log_avg_[static_cast<std::size_t>(r.start_cell)];
  const std::size_t e = static_cast<std::size_t>(r.end_cell);
  const std::size_t s = static_cast<std::size_t>(r.start_cell);
  return ((pre_log_[e] - pre_log_[s]) + (pre_log_c_[e] - pre_log_c_[s])) /
         static_cast<double>(r.num_cells());
}

double Weight::integral(Interval r) const {
  return average(r) * mesh_.length(r);
}

double Weight::min_cell_average(Interval r) const {
  if (!mesh_.valid(r)) throw std::domain_error("interval does not belong to this mesh");
  double m = avg_[static_cast<std::size_t>(r.start_cell)];
  for (cell_index i = r.start_cell + 1; i < r.end_cell; ++i)
    m = std::min(m, avg_[static_cast<std::size_t>(i)]);
  return m;
}

// --- WeightModel ------------------------------------------------------------

WeightModel WeightModel::pow(double t) const {
  WeightModel out;
  out.background = std::pow(background, t);
  out.pieces = pieces;
  for (PowerPiece& piece : out.pieces) piece.gamma *= t;
  return out;
}

// --- WeightPair -------------------------------------------------------------

double conjugate_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must lie in (1, inf)");
  return p / (p - 1.0);
}

WeightPair::WeightPair(double p, Weight w, Weight sigma, PairMode mode,
                       std::optional<WeightModel> model, std::optional<WeightModel> sigma_model)
    : p_(p),
      pc_(conjugate_exponent(p)),
      w_(std::move(w)),
      sigma_(std::move(sigma)),
      mode_(mode),
      model_(std::move(model)),
      sigma_model_(std::move(sigma_model)) {}

WeightPair WeightPair::discrete(Weight w, double p) {
  const double pc = conjugate_exponent(p);
  // Discrete mode treats the weight as literally piecewise constant, so any
  // closed-form log data is replaced by logs of the cell averages.
  Weight base = Weight::from_cell_averages(w.mesh(), w.averages());
  const std::size_t n = static_cast<std::size_t>(base.num_cells());
  std::vector<double> savg(n), slog(n);
  for (std::size_t i = 0; i < n; ++i) {
    savg[i] = std::pow(base.averages()[i], 1.0 - pc);
    slog[i] = (1.0 - pc) * base.log_averages()[i];
    if (!(savg[i] > 0.0) || !std::isfinite(savg[i]))
      throw std::invalid_argument("dual weight cell average is not positive and finite");
    // Defining identity per cell: avg_sigma * avg_w^(p'-1) == 1.
    const double check = savg[i] * std::pow(base.averages()[i], pc - 1.0);
    if (std::abs(check - 1.0) > 1e-12)
      throw std::runtime_error("dual weight identity failed on construction");
  }
  Weight sigma = Weight::from_cell_data(base.mesh(), std::move(savg), std::move(slog));
  return WeightPair(p, std::move(base), std::move(sigma), PairMode::Discrete, std::nullopt,
                    std::nullopt);
}

WeightPair WeightPair::analytic(const Mesh& mesh, const WeightModel& model, double p) {
  const double pc = conjugate_exponent(p);
  WeightModel sigma_model = model.pow(1.0 - pc);
  Weight w = Weight::from_model(mesh, model);
  Weight sigma = Weight::from_model(mesh, sigma_model);
  return WeightPair(p, std::move(w), std::move(sigma), PairMode::Analytic, model,
                    std::move(sigma_model));
}

WeightPair WeightPair::dual_view() const {
  return WeightPair(pc_, sigma_, w_, mode_, sigma_model_, model_);
}

Weight WeightPair::dual_at(double r) const {
  const double rc = conjugate_exponent(r);  // validates r
  const double t = 1.0 - rc;                // == -1/(r-1)
  if (mode_ == PairMode::Analytic) return Weight::from_model(mesh(), model_->pow(t));
  const std::size_t n = static_cast<std::size_t>(w_.num_cells());
  std::vector<double> avg(n), log_avg(n);
  for (std::size_t i = 0; i < n; ++i) {
    avg[i] = std::pow(w_.averages()[i], t);
    log_avg[i] = t * w_.log_averages()[i];
  }
  return Weight::from_cell_data(mesh(), std::move(avg), std::move(log_avg));
}

// --- example families -------------------------------------------------------

WDeltaExample example_wdelta(double p, double delta, double alpha, int levels) {
  if (!(p > 2.0)) throw std::invalid_argument("example requires p > 2");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(alpha > 1.0 / p && alpha < 0.5))
    throw std::invalid_argument("alpha must lie in (1/p, 1/2)");

  const double target = std::pow(delta, -alpha) + 1.0;  // ideal second singularity
  double span = 2.0;
  while (span < target + 2.0) span *= 2.0;
  const Mesh mesh(-1.0, span / static_cast<double>(cell_index{1} << levels), levels);
  const double h = mesh.cell_width();
  const cell_index per_unit = static_cast<cell_index>(std::llround(1.0 / h));
  if (static_cast<double>(per_unit) * h != 1.0 || per_unit < 1)
    throw std::invalid_argument("mesh cannot align both singularities");

  const cell_index zero_idx = per_unit;  // cell boundary at x = 0
  const cell_index s2_idx = static_cast<cell_index>(std::llround((target + 1.0) / h));
  const double s2 = mesh.origin() + static_cast<double>(s2_idx) * h;
  if (s2_idx - per_unit < 2 * per_unit || s2_idx + per_unit > mesh.num_cells())
    throw std::invalid_argument("mesh cannot align both singularities");

  WeightModel model;
  model.pieces.push_back(
      PowerPiece{(p - 1.0) * (1.0 - delta), 0.0, Interval{0, 2 * zero_idx}});
  model.pieces.push_back(
      PowerPiece{delta - 1.0, s2, Interval{s2_idx - per_unit, s2_idx + per_unit}});
  WeightPair pair = WeightPair::analytic(mesh, model, p);
  return WDeltaExample{mesh, std::move(pair), s2, p, delta, alpha};
}

WeightPair observation_pair(double p, double delta, int levels) {
  conjugate_exponent(p);
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const Mesh mesh(-1.0, 2.0 / static_cast<double>(cell_index{1} << levels), levels);
  WeightModel model;
  model.pieces.push_back(PowerPiece{(p - 1.0) * (1.0 - delta), 0.0, mesh.whole()});
  return WeightPair::analytic(mesh, model, p);
}

// --- serialization ----------------------------------------------------------

std::string weight_to_csv(const Weight& w) {
  std::string out = "cell_index,average\n";
  for (cell_index i = 0; i < w.num_cells(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += fmt_g(w.cell_average(i), 12);
    out += '\n';
  }
  return out;
}

Weight weight_from_csv(const Mesh& mesh, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || (line != "cell_index,average" && line != "cell_index,average\r"))
    throw std::invalid_argument("weight csv must start with header 'cell_index,average'");
  std::vector<double> avg;
  avg.reserve(static_cast<std::size_t>(mesh.num_cells()));
  cell_index expect = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("weight csv row missing comma");
    const cell_index idx = std::stoll(line.substr(0, comma));
    if (idx != expect) throw std::invalid_argument("weight csv rows must cover cells in order");
    avg.push_back(std::stod(line.substr(comma + 1)));
    ++expect;
  }
  if (expect != mesh.num_cells())
    throw std::invalid_argument("weight csv row count does not match the mesh");
  return Weight::from_cell_averages(mesh, avg);
}

std::string weight_to_json(const Weight& w) {
  std::string out = "{\"origin\":";
  out += fmt_g(w.mesh().origin(), 17);
  out += ",\"cell_width\":";
  out += fmt_g(w.mesh().cell_width(), 17);
  out += ",\"num_cells\":";
  out += std::to_string(w.num_cells());
  out += ",\"averages\":[";
  for (cell_index i = 0; i < w.num_cells(); ++i) {
    if (i) out += ',';
    out += fmt_g(w.cell_average(i), 17);
  }
  out += "]}";
  return out;
}

Weight weight_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const double origin = j.at("origin").get<double>();
  const double cell_width = j.at("cell_width").get<double>();
  const std::uint64_t num_cells = j.at("num_cells").get<std::uint64_t>();
  if (num_cells == 0 || !std::has_single_bit(num_cells))
    throw std::invalid_argument("num_cells must be a power of two");
  const int levels = std::bit_width(num_cells) - 1;
  const auto avgs = j.at("averages").get<std::vector<double>>();
  return Weight::from_cell_averages(Mesh(origin, cell_width, levels), avgs);
}

}  // namespace aplab
