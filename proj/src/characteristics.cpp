#include "aplab/characteristics.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "aplab/maximal.hpp"
#include "aplab/parallel.hpp"

namespace aplab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Sparse table answering min-over-cell-range queries in O(1); the answer is
/// the same double a linear scan would produce (min is exact).
class MinTable {
 public:
  explicit MinTable(std::span<const double> v) {
    const std::size_t n = v.size();
    rows_.emplace_back(v.begin(), v.end());
    for (std::size_t len = 2; len <= n; len *= 2) {
      const auto& prev = rows_.back();
      std::vector<double> row(n - len + 1);
      for (std::size_t i = 0; i + len <= n; ++i)
        row[i] = std::min(prev[i], prev[i + len / 2]);
      rows_.push_back(std::move(row));
    }
  }

  double min(cell_index s, cell_index e) const {
    const auto len = static_cast<std::uint64_t>(e - s);
    const int k = std::bit_width(len) - 1;
    const auto& row = rows_[static_cast<std::size_t>(k)];
    return std::min(row[static_cast<std::size_t>(s)],
                    row[static_cast<std::size_t>(e) - (std::size_t{1} << k)]);
  }

 private:
  std::vector<std::vector<double>> rows_;
};

/// Factors resolved against a concrete pair: every A_r factor gets its dual
/// weight up front, A1 gets a range-minimum table, so a scan pays O(1) per
/// interval per factor (Fujii-Wilson excepted).
class Evaluator {
 public:
  Evaluator(const WeightPair& pair, const FlavorSpec& spec) : pair_(&pair) {
    spec.validate();
    for (const Factor& f : spec.factors) {
      Prep p;
      p.kind = f.kind;
      p.exponent = f.exponent;
      switch (f.kind) {
        case Flavor::Ap: {
          p.r = f.param == 0.0 ? pair.p() : f.param;
          if (p.r == pair.p())
            p.dual = pair.sigma();
          else
            p.dual = pair.dual_at(p.r);
          break;
        }
        case Flavor::A1:
          if (!rmq_) rmq_.emplace(pair.w().averages());
          break;
        case Flavor::AinfExp:
          break;
        case Flavor::AinfFW:
          fw_ = true;
          break;
      }
      prepped_.push_back(std::move(p));
    }
  }

  bool has_fw() const { return fw_; }

  /// fw_value supplies the Fujii-Wilson ratio of the region when the caller
  /// already has it (the dyadic sweep); otherwise it is computed in place.
  double eval(Interval region, std::optional<double> fw_value) const {
    const Weight& w = pair_->w();
    double out = 1.0;
    for (const Prep& p : prepped_) {
      double t = 0.0;
      switch (p.kind) {
        case Flavor::Ap:
          t = w.average(region) * std::pow(p.dual->average(region), p.r - 1.0);
          break;
        case Flavor::A1:
          t = w.average(region) / rmq_->min(region.start_cell, region.end_cell);
          break;
        case Flavor::AinfExp:
          t = w.average(region) * std::exp(-w.log_average(region));
          break;
        case Flavor::AinfFW:
          t = fw_value ? *fw_value : ainf_fw_local(w, region);
          break;
      }
      out *= p.exponent == 1.0 ? t : std::pow(t, p.exponent);
    }
    return out;
  }

 private:
  struct Prep {
    Flavor kind = Flavor::Ap;
    double exponent = 1.0;
    double r = 0.0;
    std::optional<Weight> dual;
  };

  const WeightPair* pair_;
  std::vector<Prep> prepped_;
  std::optional<MinTable> rmq_;
  bool fw_ = false;
};

struct Candidate {
  double value = kNegInf;
  Interval where{0, 1};
};

bool beats(const Candidate& a, const Candidate& b) {
  return sup_candidate_beats(a.value, a.where, b.value, b.where);
}

double fw_from_maxfun(std::span<const double> maxfun, const Weight& w, Interval region) {
  double num = 0.0;
  for (double x : maxfun) num += x;
  // Route the denominator through the compensated interval average so the
  // ratio stays accurate when the region's mass is dwarfed by its neighbours.
  return num / (w.average(region) * static_cast<double>(region.num_cells()));
}

void check_region(const Weight& w, Interval region) {
  if (region.start_cell < 0 || region.end_cell > w.num_cells() ||
      region.start_cell >= region.end_cell)
    throw std::invalid_argument("region must be a nonempty cell range inside the mesh");
}

}  // namespace

bool sup_candidate_beats(double value_a, Interval a, double value_b, Interval b) {
  if (value_a != value_b) return value_a > value_b;
  if (a.start_cell != b.start_cell) return a.start_cell < b.start_cell;
  return a.num_cells() < b.num_cells();
}

bool FlavorSpec::has_fw() const {
  for (const Factor& f : factors)
    if (f.kind == Flavor::AinfFW) return true;
  return false;
}

void FlavorSpec::validate() const {
  if (factors.empty()) throw std::invalid_argument("a quantity needs at least one factor");
  for (const Factor& f : factors) {
    if (!std::isfinite(f.exponent)) throw std::invalid_argument("factor exponent must be finite");
    if (f.kind == Flavor::Ap && f.param != 0.0 && !(f.param > 1.0 && std::isfinite(f.param)))
      throw std::invalid_argument("A_r parameter must lie in (1, inf)");
  }
}

double phi(double t) {
  if (!(t >= 1.0)) throw std::domain_error("phi is defined for arguments >= 1");
  return 1.0 + std::log(t);
}

double ap_local(const WeightPair& pair, Interval region) {
  check_region(pair.w(), region);
  return pair.w().average(region) * std::pow(pair.sigma().average(region), pair.p() - 1.0);
}

double ap_local(const WeightPair& pair, Cube region) {
  return ap_local(pair, pair.mesh().cells(region));
}

double ar_local(const WeightPair& pair, double r, Interval region) {
  check_region(pair.w(), region);
  if (r == pair.p()) return ap_local(pair, region);
  const Weight dual = pair.dual_at(r);
  return pair.w().average(region) * std::pow(dual.average(region), r - 1.0);
}

double a1_local(const Weight& w, Interval region) {
  check_region(w, region);
  return w.average(region) / w.min_cell_average(region);
}

double ainf_exp_local(const Weight& w, Interval region) {
  check_region(w, region);
  return w.average(region) * std::exp(-w.log_average(region));
}

double ainf_fw_local(const Weight& w, Interval region) {
  check_region(w, region);
  const std::vector<double> maxfun =
      range_maximal(w.averages(), region.start_cell, region.end_cell);
  return fw_from_maxfun(maxfun, w, region);
}

double mixed_local(const WeightPair& pair, const FlavorSpec& spec, Interval region) {
  check_region(pair.w(), region);
  return Evaluator(pair, spec).eval(region, std::nullopt);
}

SupScope default_scope(const FlavorSpec& spec) {
  return spec.has_fw() ? SupScope::Dyadic : SupScope::AllIntervals;
}

SupremumResult global_sup(const WeightPair& pair, const FlavorSpec& spec,
                          std::optional<SupScope> scope) {
  const SupScope sc = scope.value_or(default_scope(spec));
  const Evaluator ev(pair, spec);
  const Mesh& mesh = pair.mesh();
  const cell_index n = mesh.num_cells();

  if (sc == SupScope::Dyadic) {
    std::vector<double> fw_table;
    if (ev.has_fw()) fw_table = fw_all_dyadic(pair.w());
    Candidate best;
    for (Cube q : mesh.enumerate_dyadic()) {
      const Interval r = mesh.cells(q);
      std::optional<double> fwv;
      if (!fw_table.empty()) fwv = fw_table[mesh.cube_id(q)];
      const Candidate c{ev.eval(r, fwv), r};
      if (beats(c, best)) best = c;
    }
    return {best.value, best.where, sc};
  }

  std::vector<Candidate> local(static_cast<std::size_t>(num_chunks(n)));
  parallel_chunks(n, [&](int chunk, std::int64_t begin, std::int64_t end) {
    Candidate best;
    for (cell_index s = begin; s < end; ++s)
      for (cell_index e = s + 1; e <= n; ++e) {
        const Candidate c{ev.eval(Interval{s, e}, std::nullopt), Interval{s, e}};
        if (beats(c, best)) best = c;
      }
    local[static_cast<std::size_t>(chunk)] = best;
  });
  Candidate best;
  for (const Candidate& c : local)
    if (beats(c, best)) best = c;
  return {best.value, best.where, sc};
}

std::vector<double> fw_all_dyadic(const Weight& w) {
  std::vector<double> out(w.mesh().cube_count(), 0.0);
  dyadic_restricted_maximal_sweep(
      w.mesh(), w.averages(), [&](Cube q, std::span<const double> maxfun) {
        out[w.mesh().cube_id(q)] = fw_from_maxfun(maxfun, w, w.mesh().cells(q));
      });
  return out;
}

SupremumResult global_fw_sup(const Weight& w, SupScope scope) {
  if (scope == SupScope::Dyadic) {
    const std::vector<double> table = fw_all_dyadic(w);
    Candidate best;
    for (Cube q : w.mesh().enumerate_dyadic()) {
      const Candidate c{table[w.mesh().cube_id(q)], w.mesh().cells(q)};
      if (beats(c, best)) best = c;
    }
    return {best.value, best.where, scope};
  }
  const cell_index n = w.num_cells();
  std::vector<Candidate> local(static_cast<std::size_t>(num_chunks(n)));
  parallel_chunks(n, [&](int chunk, std::int64_t begin, std::int64_t end) {
    Candidate best;
    for (cell_index s = begin; s < end; ++s)
      for (cell_index e = s + 1; e <= n; ++e) {
        const Candidate c{ainf_fw_local(w, Interval{s, e}), Interval{s, e}};
        if (beats(c, best)) best = c;
      }
    local[static_cast<std::size_t>(chunk)] = best;
  });
  Candidate best;
  for (const Candidate& c : local)
    if (beats(c, best)) best = c;
  return {best.value, best.where, scope};
}

std::string_view bound_name(BoundId id) {
  switch (id) {
    case BoundId::Buckley: return "buckley";
    case BoundId::MaxExp0: return "maxexp0";
    case BoundId::MaxW: return "maxW";
    case BoundId::HlMixed: return "hl-mixed";
    case BoundId::MixedPr: return "mixed-pr";
    case BoundId::Exp1: return "exp1";
    case BoundId::Exp0: return "exp0";
    case BoundId::W0: return "w0";
    case BoundId::MixedPq: return "mixed-pq";
  }
  return "";
}

std::optional<BoundId> bound_from_name(std::string_view name) {
  for (BoundId id : all_bounds())
    if (bound_name(id) == name) return id;
  return std::nullopt;
}

const std::vector<BoundId>& all_bounds() {
  static const std::vector<BoundId> ids = {
      BoundId::Buckley, BoundId::MaxExp0, BoundId::MaxW,
      BoundId::HlMixed, BoundId::MixedPr, BoundId::Exp1,
      BoundId::Exp0,    BoundId::W0,      BoundId::MixedPq};
  return ids;
}

bool bound_needs_param(BoundId id) {
  return id == BoundId::MixedPr || id == BoundId::MixedPq;
}

namespace {

// [v]_{(A_p)^{1/p} (AinfX)^{1/p'}} with p the view's own exponent.
FlavorSpec strong_mixed_spec(const WeightPair& view, Flavor inf_kind) {
  return FlavorSpec::product({Factor{Flavor::Ap, 1.0 / view.p(), 0.0},
                              Factor{inf_kind, 1.0 / view.p_conj(), 0.0}});
}

// [v]_{(A_p)^{1/(p-1)} (X)^{1-1/(p-1)}} with p the view's own exponent; the
// second factor is A_r when r > 0, the exponential ratio otherwise.
FlavorSpec onesup_spec(const WeightPair& view, double r) {
  const double a = 1.0 / (view.p() - 1.0);
  Factor second = r > 0.0 ? Factor{Flavor::Ap, 1.0 - a, r} : Factor{Flavor::AinfExp, 1.0 - a, 0.0};
  return FlavorSpec::product({Factor{Flavor::Ap, a, 0.0}, second});
}

}  // namespace

double bound_value(const WeightPair& pair, BoundId id, std::optional<double> param) {
  const WeightPair dual = pair.dual_view();
  const double p = pair.p();
  const double pc = pair.p_conj();
  switch (id) {
    case BoundId::Buckley:
      return global_sup(dual, FlavorSpec::ap()).value;
    case BoundId::MaxExp0:
      return global_sup(dual, strong_mixed_spec(dual, Flavor::AinfExp)).value;
    case BoundId::MaxW: {
      const double head = std::pow(phi(global_sup(dual, FlavorSpec::ap()).value), 1.0 / p);
      return head * global_sup(dual, strong_mixed_spec(dual, Flavor::AinfFW)).value;
    }
    case BoundId::HlMixed: {
      const double head = std::pow(global_sup(pair, FlavorSpec::ap()).value, 1.0 / p);
      const double tw = std::pow(global_fw_sup(pair.w()).value, 1.0 / pc);
      const double ts = std::pow(global_fw_sup(pair.sigma()).value, 1.0 / p);
      return head * std::max(tw, ts);
    }
    case BoundId::MixedPr: {
      if (!param || !(*param > 1.0) || !std::isfinite(*param))
        throw std::invalid_argument("mixed-pr needs a parameter r in (1, inf)");
      const double a = global_sup(pair, onesup_spec(pair, *param)).value;
      const double b = global_sup(dual, onesup_spec(dual, *param)).value;
      return std::max(a, b);
    }
    case BoundId::Exp1:
      return global_sup(pair, onesup_spec(pair, 0.0)).value;
    case BoundId::Exp0: {
      const double a = std::pow(phi(global_sup(pair, FlavorSpec::ap()).value), 1.0 / p) *
                       global_sup(pair, strong_mixed_spec(pair, Flavor::AinfExp)).value;
      const double b = std::pow(phi(global_sup(dual, FlavorSpec::ap()).value), 1.0 / pc) *
                       global_sup(dual, strong_mixed_spec(dual, Flavor::AinfExp)).value;
      return std::max(a, b);
    }
    case BoundId::W0: {
      const double head = phi(global_sup(pair, FlavorSpec::ap()).value);
      const double a = global_sup(pair, strong_mixed_spec(pair, Flavor::AinfFW)).value;
      const double b = global_sup(dual, strong_mixed_spec(dual, Flavor::AinfFW)).value;
      return head * std::max(a, b);
    }
    case BoundId::MixedPq: {
      if (!param || !(*param > 1.0) || !(*param < p))
        throw std::invalid_argument("mixed-pq needs a parameter q in (1, p)");
      const double head = std::pow(global_sup(pair, FlavorSpec::ar(*param)).value, 1.0 / p);
      return head * std::pow(global_fw_sup(pair.w()).value, 1.0 / pc);
    }
  }
  throw std::invalid_argument("unknown bound id");
}

}  // namespace aplab
