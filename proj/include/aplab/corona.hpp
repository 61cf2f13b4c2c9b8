#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aplab/rng.hpp"
#include "aplab/sparse.hpp"
#include "aplab/weight.hpp"

namespace aplab {

class WeightPair;

/// Dyadic cube family carrying a positive score a_Q per cube and a measure,
/// balanced so that a_Q^r * nu(Q)/|Q| stays inside [c, C] for every member
/// (|Q| is the cube's length, so the quantity is score^r times the
/// nu-average). The window may be measured from the data or supplied and
/// validated.
class WeightedFamily {
 public:
  static WeightedFamily measured(SparseFamily cubes, std::vector<double> scores, Weight nu,
                                 double r);
  static WeightedFamily supplied(SparseFamily cubes, std::vector<double> scores, Weight nu,
                                 double r, double c, double C);

  const SparseFamily& family() const { return cubes_; }
  const Weight& nu() const { return nu_; }
  std::size_t size() const { return cubes_.size(); }
  double score(std::size_t i) const { return scores_[i]; }
  const std::vector<double>& scores() const { return scores_; }
  double balance_r() const { return r_; }
  double balance_c() const { return c_; }
  double balance_C() const { return big_c_; }
  /// score^r * nu-average of member i.
  double balance_quantity(std::size_t i) const;

 private:
  WeightedFamily(SparseFamily cubes, std::vector<double> scores, Weight nu, double r, double c,
                 double big_c);

  SparseFamily cubes_;
  std::vector<double> scores_;
  Weight nu_;
  double r_, c_, big_c_;
};

/// Stopping-time decomposition of a WeightedFamily: generation 0 holds the
/// inclusion-maximal members; generation k+1 holds, under each generation-k
/// cube P, the maximal members Q strictly inside P with a_Q > 2 a_P. Every
/// member maps to the smallest stopping cube containing it (itself when it
/// stops), and along that map scores never more than double.
struct CoronaResult {
  std::vector<std::vector<std::size_t>> generations;
  std::vector<std::int64_t> stop_parent;  // member -> governing stopping member
  std::vector<bool> stopping;
  /// Ratio class: the integer b with 2^{-b} < a_Q / a_{stop_parent} <= 2^{1-b}.
  std::vector<std::int64_t> ratio_class;
};

CoronaResult corona_decompose(const WeightedFamily& fam);

struct CoronaBoundCheck {
  double lhs = 0.0;  // (int (sum_Q a_Q chi_Q)^p dnu)^{1/p} over the mesh
  double rhs = 0.0;  // (C/c) * (sum over stopping Q of a_Q^p nu(Q))^{1/p}
  double ratio = 0.0;
};

CoronaBoundCheck verify_corona_bound(const WeightedFamily& fam, const CoronaResult& res,
                                     double p);

/// Members bucketed by ceil(log2 of the local product characteristic):
/// bucket a holds values in (2^{a-1}, 2^a]. The cap floor(log2 global) is
/// reported; observed buckets are checked against [-1, cap + 1] (a bucket of
/// cap + 1 occurs whenever the global value is not a power of two, e.g. cell
/// averages (1,1,1,4) at exponent 2 put both [0,4) and [2,4) in bucket 1
/// while the cap is 0).
struct ApStratification {
  std::vector<std::int64_t> bucket_of;
  std::int64_t min_bucket = 0;
  std::int64_t max_bucket = 0;
  std::int64_t cap = 0;
};

ApStratification stratify_ap(const SparseFamily& S, const WeightPair& pair);

/// {"generations": [[{level, offset}...]...], "parent": {"level:offset": cube}}.
std::string corona_to_json(const WeightedFamily& fam, const CoronaResult& res);

/// Random admissible instance: a quarter-cube family (each member spawns at
/// most two of its four quarter-size subcubes, so strict descendants cover
/// at most half of it), a log-uniform random measure, and scores back-solved
/// from a log-uniform balance quantity so admissibility holds by
/// construction.
WeightedFamily random_weighted_family(const Mesh& mesh, Rng& rng, double r);

}  // namespace aplab
