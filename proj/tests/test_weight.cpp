#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "aplab/weight.hpp"

using namespace aplab;

namespace {
Mesh unit_mesh(int levels) { return Mesh(0.0, std::ldexp(1.0, -levels), levels); }
}  // namespace

TEST_CASE("uniform weights have exact cell data") {
  const Mesh mesh = unit_mesh(3);
  const Weight w = Weight::uniform(mesh, 3.0);
  for (cell_index i = 0; i < mesh.num_cells(); ++i) {
    CHECK(w.cell_average(i) == 3.0);
    CHECK(w.cell_log_average(i) == std::log(3.0));
  }
  CHECK(w.average(Interval{2, 7}) == 3.0);
  CHECK(w.integral(mesh.whole()) == 3.0);
  CHECK(w.min_cell_average(Interval{0, 8}) == 3.0);
}

TEST_CASE("closed-form power weight integrates exactly") {
  // w(x) = x on [0,1) with 4 cells: cell averages (2i+1)/8, all dyadic rationals.
  const Mesh mesh = unit_mesh(2);
  WeightModel m;
  m.pieces.push_back(PowerPiece{1.0, 0.0, mesh.whole()});
  const Weight w = Weight::from_model(mesh, m);
  CHECK(w.cell_average(0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(w.cell_average(1) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(w.cell_average(2) == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(w.cell_average(3) == doctest::Approx(0.875).epsilon(1e-15));
  // int log x over [0, 1/4) = x log x - x at 1/4; average = log(1/4) - 1.
  CHECK(w.cell_log_average(0) == doctest::Approx(std::log(0.25) - 1.0).epsilon(1e-14));

  // Raising the model to a power matches the closed form of the new exponent.
  const Weight sq = Weight::from_model(mesh, m.pow(0.5));
  const double mass0 = (2.0 / 3.0) * std::pow(0.25, 1.5);  // int_0^{1/4} sqrt(x)
  CHECK(sq.cell_average(0) == doctest::Approx(mass0 / 0.25).epsilon(1e-14));
}

TEST_CASE("discrete pairs expose the dual weight and the dual view") {
  const Mesh mesh = unit_mesh(2);
  const Weight w = Weight::from_cell_averages(mesh, std::vector<double>{1.0, 1.0, 1.0, 4.0});
  const WeightPair pair = WeightPair::discrete(w, 2.0);
  CHECK(pair.p_conj() == 2.0);
  CHECK(pair.sigma().cell_average(3) == doctest::Approx(0.25).epsilon(1e-15));

  const WeightPair dual = pair.dual_view();
  CHECK(dual.p() == 2.0);
  for (cell_index i = 0; i < 4; ++i) {
    CHECK(dual.w().cell_average(i) == pair.sigma().cell_average(i));
    CHECK(dual.sigma().cell_average(i) == pair.w().cell_average(i));
  }

  const Weight dual3 = pair.dual_at(3.0);  // w^{-1/2}
  CHECK(dual3.cell_average(3) == doctest::Approx(std::pow(4.0, -0.5)).epsilon(1e-15));

  CHECK(conjugate_exponent(2.0) == 2.0);
  CHECK(conjugate_exponent(1.5) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(WeightPair::discrete(w, 1.0), std::invalid_argument);
}

TEST_CASE("analytic pairs keep the dual weight exact near a singularity") {
  // w = x^{1/2}: sigma = x^{-1/2} at p = 2 is integrable, so the analytic
  // pair must produce finite positive dual averages on every cell.
  const Mesh mesh = unit_mesh(4);
  WeightModel m;
  m.pieces.push_back(PowerPiece{0.5, 0.0, mesh.whole()});
  const WeightPair pair = WeightPair::analytic(mesh, m, 2.0);
  CHECK(pair.mode() == PairMode::Analytic);
  for (cell_index i = 0; i < mesh.num_cells(); ++i) {
    CHECK(pair.sigma().cell_average(i) > 0.0);
    CHECK(std::isfinite(pair.sigma().cell_average(i)));
  }
  // First dual cell: int_0^h x^{-1/2} dx = 2 sqrt(h), averaged over width h.
  const double h = std::ldexp(1.0, -4);
  CHECK(pair.sigma().cell_average(0) == doctest::Approx(2.0 / std::sqrt(h)).epsilon(1e-13));
}

TEST_CASE("weight serialization round-trips") {
  const Mesh mesh = unit_mesh(2);
  const Weight w =
      Weight::from_cell_averages(mesh, std::vector<double>{1.5, 2.25, 0.5, 8.0});

  const std::string csv = weight_to_csv(w);
  CHECK(csv.rfind("cell_index,average\n", 0) == 0);
  const Weight from_csv = weight_from_csv(mesh, csv);
  for (cell_index i = 0; i < 4; ++i)
    CHECK(from_csv.cell_average(i) == w.cell_average(i));  // 12 digits cover these exactly

  const std::string json = weight_to_json(w);
  const nlohmann::json parsed = nlohmann::json::parse(json);
  CHECK(parsed.at("num_cells") == 4);
  CHECK(parsed.at("averages").size() == 4);
  const Weight from_json = weight_from_json(json);
  CHECK(from_json.mesh() == mesh);
  for (cell_index i = 0; i < 4; ++i)
    CHECK(from_json.cell_average(i) == w.cell_average(i));  // 17 digits are lossless
}

TEST_CASE("two-singularity example family") {
  const WDeltaExample ex = example_wdelta(3.0, 1.0 / 16.0, 0.4, 8);
  CHECK(ex.p == 3.0);
  CHECK(ex.delta == 1.0 / 16.0);
  CHECK(ex.mesh.num_cells() == 256);
  CHECK(ex.mesh.cell_left(0) == -1.0);
  // Second singularity snaps to the cell boundary nearest delta^{-alpha} + 1.
  const double target = std::pow(16.0, 0.4) + 1.0;
  CHECK(std::abs(ex.s2 - target) <= 0.5 * 256.0 / 256.0);
  for (cell_index i = 0; i < ex.mesh.num_cells(); ++i) {
    CHECK(ex.pair.w().cell_average(i) > 0.0);
    CHECK(std::isfinite(ex.pair.w().cell_average(i)));
  }
  CHECK_THROWS_AS(example_wdelta(2.0, 0.1, 0.4, 6), std::invalid_argument);   // needs p > 2
  CHECK_THROWS_AS(example_wdelta(3.0, 0.1, 0.6, 6), std::invalid_argument);   // alpha < 1/2
  CHECK_THROWS_AS(example_wdelta(3.0, 1.5, 0.4, 6), std::invalid_argument);   // delta in (0,1)
}

TEST_CASE("single-power observation family") {
  const WeightPair pair = observation_pair(2.0, 0.25, 6);
  CHECK(pair.p() == 2.0);
  CHECK(pair.mesh().num_cells() == 64);
  CHECK(pair.mesh().cell_left(0) == -1.0);
  CHECK(pair.mesh().cell_right(pair.mesh().num_cells() - 1) == 1.0);
  for (cell_index i = 0; i < 64; ++i) CHECK(pair.w().cell_average(i) > 0.0);
}
