#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <json.hpp>
#include <vector>

#include "aplab/experiments.hpp"
#include "aplab/weight.hpp"

using namespace aplab;

TEST_CASE("slope fit recovers an exact power law") {
  const std::vector<double> deltas{0.5, 0.25, 0.125, 0.0625};
  std::vector<double> values;
  for (double d : deltas) values.push_back(2.5 * std::pow(d, -1.7));
  const SlopeFit fit = fit_slope(deltas, values);
  CHECK(fit.slope == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(2.5)).epsilon(1e-12));
  CHECK(fit.r2 >= 0.999999);

  const std::vector<double> flat{3.0, 3.0, 3.0, 3.0};
  const SlopeFit fz = fit_slope(deltas, flat);
  CHECK(fz.slope == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fz.r2 == 1.0);
}

TEST_CASE("slope fit rejects degenerate inputs") {
  const std::vector<double> two_d{0.5, 0.25}, two_v{1.0, 2.0};
  CHECK_THROWS_AS(fit_slope(two_d, two_v), std::invalid_argument);

  const std::vector<double> d3{0.5, 0.25, 0.125};
  CHECK_THROWS_AS(fit_slope(d3, std::vector<double>{1.0, 0.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(std::vector<double>{0.5, 0.25, 1.5},
                            std::vector<double>{1.0, 2.0, 3.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(std::vector<double>{0.5, 0.5, 0.5},
                            std::vector<double>{1.0, 2.0, 3.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(d3, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("default sweep columns are the parameter-free bounds in order") {
  const std::vector<BoundId> ids = default_sweep_bounds();
  REQUIRE(ids.size() == 7);
  CHECK(ids == std::vector<BoundId>{BoundId::Buckley, BoundId::MaxExp0, BoundId::MaxW,
                                    BoundId::HlMixed, BoundId::Exp1, BoundId::Exp0,
                                    BoundId::W0});
  for (BoundId id : ids) CHECK_FALSE(bound_needs_param(id));
}

TEST_CASE("random corpora are reproducible and validated") {
  const auto a = random_corpus(77, 5, CorpusKind::CellAverages, 5, 2.0);
  const auto b = random_corpus(77, 5, CorpusKind::CellAverages, 5, 2.0);
  REQUIRE(a.size() == 5);
  REQUIRE(b.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto va = a[i].w().averages();
    const auto vb = b[i].w().averages();
    REQUIRE(va.size() == vb.size());
    CHECK(std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) == 0);
  }
  const auto c = random_corpus(78, 5, CorpusKind::CellAverages, 5, 2.0);
  CHECK(std::memcmp(a[0].w().averages().data(), c[0].w().averages().data(),
                    a[0].w().averages().size() * sizeof(double)) != 0);

  const auto pw = random_corpus(5, 3, CorpusKind::Power, 6, 2.5);
  for (const WeightPair& pair : pw) {
    CHECK(pair.mode() == PairMode::Analytic);
    CHECK(pair.p() == 2.5);
  }
  const auto wd = random_corpus(9, 2, CorpusKind::WDelta, 7, 3.0);
  CHECK(wd.size() == 2);
  CHECK_THROWS_AS(random_corpus(9, 2, CorpusKind::WDelta, 7, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(random_corpus(9, 2, CorpusKind::CellAverages, 7, 1.0),
                  std::invalid_argument);
}

TEST_CASE("two-singularity sweep smoke run") {
  SweepConfig cfg;
  cfg.p = 3.0;
  cfg.alpha = 0.4;
  cfg.deltas = {0.125, 0.0625, 0.03125};
  cfg.levels = 6;
  cfg.seed = 11;
  const SweepReport rep = run_sweep(cfg);
  REQUIRE(rep.rows.size() == 3);
  CHECK_FALSE(rep.observation);
  REQUIRE(rep.columns.size() == 12);
  for (const SweepRow& row : rep.rows) {
    REQUIRE(row.values.size() == rep.columns.size());
    for (double v : row.values) CHECK(v > 0.0);
  }
  CHECK(rep.slopes.count("ap") == 1);
  CHECK(rep.slopes.count("testing_dual") == 1);

  const std::string csv = sweep_to_csv(rep);
  const std::string header =
      "delta,ap,ainf_fw_w,ainf_fw_sigma,buckley,maxexp0,maxW,hl-mixed,exp1,exp0,w0,"
      "testing_fwd,testing_dual\n";
  REQUIRE(csv.size() > header.size());
  CHECK(csv.substr(0, header.size()) == header);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows

  const std::string js = sweep_to_json(rep);
  const nlohmann::json j = nlohmann::json::parse(js);
  CHECK(j.at("config").at("p").get<double>() == 3.0);
  CHECK(j.at("config").at("example").get<std::string>() == "wdelta");
  CHECK(j.at("rows").size() == 3);
  CHECK(j.at("slopes").contains("exp1"));

  // Byte determinism of the whole artifact across repeated runs.
  const SweepReport rep2 = run_sweep(cfg);
  CHECK(sweep_to_csv(rep2) == csv);
  CHECK(sweep_to_json(rep2) == js);
}

TEST_CASE("single-power sweep smoke run") {
  const std::vector<double> deltas{0.125, 0.0625, 0.03125};
  const SweepReport rep = run_observation_sweep(2.0, 0.5, deltas, 6);
  CHECK(rep.observation);
  REQUIRE(rep.rows.size() == 3);
  const std::string csv = sweep_to_csv(rep);
  const std::string header =
      "delta,ap,ainf_fw_w,ainf_fw_sigma,mixed-alpha,testing_fwd,testing_dual\n";
  CHECK(csv.substr(0, header.size()) == header);
  CHECK(rep.slopes.count("mixed-alpha") == 1);
  const nlohmann::json j = nlohmann::json::parse(sweep_to_json(rep));
  CHECK(j.at("config").at("example").get<std::string>() == "observation");
}

TEST_CASE("sweep configuration validation") {
  SweepConfig cfg;
  cfg.deltas = {0.125, 0.0625, 0.03125};
  cfg.levels = 6;

  SweepConfig bad = cfg;
  bad.p = 2.0;  // two-singularity family needs p > 2
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);

  bad = cfg;
  bad.alpha = 0.6;  // outside (1/p, 1/2)
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);

  bad = cfg;
  bad.deltas = {};
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);

  bad = cfg;
  bad.deltas = {1.5, 0.25, 0.125};
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);

  bad = cfg;
  bad.tau = 2.0;
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);

  bad = cfg;
  bad.bounds = {BoundId::MixedPr};
  CHECK_THROWS_AS(run_sweep(bad), std::invalid_argument);

  SweepConfig obs;
  obs.p = 1.0;
  obs.alpha = 0.5;
  obs.deltas = {0.125, 0.0625, 0.03125};
  obs.levels = 6;
  CHECK_THROWS_AS(run_observation_sweep(obs), std::invalid_argument);
  CHECK_THROWS_AS(run_observation_sweep(2.0, 1.5, obs.deltas, 6), std::invalid_argument);
}
