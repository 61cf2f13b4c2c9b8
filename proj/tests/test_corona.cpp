#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include <json.hpp>

#include "aplab/characteristics.hpp"
#include "aplab/corona.hpp"
#include "aplab/rng.hpp"
#include "aplab/weight.hpp"

using namespace aplab;

namespace {

// Chain [0,4) > [0,2) > [0,1) with scores 1, 1.5, 4 under the unit measure:
// the middle member stays below double its parent, the small one stops.
struct ChainFixture {
  Mesh mesh{0.0, 1.0, 2};
  SparseFamily S = SparseFamily::from_cubes(mesh, {Cube{2, 0}, Cube{1, 0}, Cube{0, 0}});
  std::size_t root = *S.index_of(Cube{2, 0});
  std::size_t mid = *S.index_of(Cube{1, 0});
  std::size_t small = *S.index_of(Cube{0, 0});
  WeightedFamily fam = make();

  WeightedFamily make() const {
    std::vector<double> scores(3, 0.0);
    scores[root] = 1.0;
    scores[mid] = 1.5;
    scores[small] = 4.0;
    return WeightedFamily::measured(S, scores, Weight::uniform(mesh, 1.0), 2.0);
  }
};

}  // namespace

TEST_CASE("measured balance constants bracket the balance quantities") {
  const ChainFixture fx;
  // score^2 times the nu-average (nu is uniform 1): 1, 2.25, 16.
  CHECK(fx.fam.balance_quantity(fx.root) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fx.fam.balance_quantity(fx.mid) == doctest::Approx(2.25).epsilon(1e-15));
  CHECK(fx.fam.balance_quantity(fx.small) == doctest::Approx(16.0).epsilon(1e-15));
  CHECK(fx.fam.balance_c() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fx.fam.balance_C() == doctest::Approx(16.0).epsilon(1e-15));
  CHECK(fx.fam.balance_r() == 2.0);
}

TEST_CASE("corona decomposition of the chain") {
  const ChainFixture fx;
  const CoronaResult res = corona_decompose(fx.fam);

  REQUIRE(res.generations.size() == 2);
  REQUIRE(res.generations[0].size() == 1);
  REQUIRE(res.generations[1].size() == 1);
  CHECK(res.generations[0][0] == fx.root);
  CHECK(res.generations[1][0] == fx.small);

  CHECK(res.stopping[fx.root]);
  CHECK_FALSE(res.stopping[fx.mid]);
  CHECK(res.stopping[fx.small]);

  CHECK(res.stop_parent[fx.root] == static_cast<std::int64_t>(fx.root));
  CHECK(res.stop_parent[fx.mid] == static_cast<std::int64_t>(fx.root));
  CHECK(res.stop_parent[fx.small] == static_cast<std::int64_t>(fx.small));

  // Ratios 1, 1.5, 1 sit in the windows (2^-b, 2^{1-b}]: b = 1, 0, 1.
  CHECK(res.ratio_class[fx.root] == 1);
  CHECK(res.ratio_class[fx.mid] == 0);
  CHECK(res.ratio_class[fx.small] == 1);
}

TEST_CASE("summation bound on the chain is exact") {
  const ChainFixture fx;
  const CoronaResult res = corona_decompose(fx.fam);
  const CoronaBoundCheck bound = verify_corona_bound(fx.fam, res, 2.0);
  // Sum of member scores per cell: 6.5, 2.5, 1, 1 under the unit measure.
  CHECK(bound.lhs == doctest::Approx(std::sqrt(50.5)).epsilon(1e-14));
  // (C/c) (sum over stopping members of a^2 nu(Q))^{1/2} = 16 sqrt(20).
  CHECK(bound.rhs == doctest::Approx(16.0 * std::sqrt(20.0)).epsilon(1e-14));
  CHECK(bound.ratio == doctest::Approx(std::sqrt(50.5) / (16.0 * std::sqrt(20.0))).epsilon(1e-13));
}

TEST_CASE("corona export carries generations and the governing map") {
  const ChainFixture fx;
  const CoronaResult res = corona_decompose(fx.fam);
  const nlohmann::json parsed = nlohmann::json::parse(corona_to_json(fx.fam, res));
  REQUIRE(parsed.contains("generations"));
  REQUIRE(parsed.contains("parent"));
  CHECK(parsed.at("generations").size() == 2);
  CHECK(parsed.at("generations")[0].size() == 1);
  CHECK(parsed.at("generations")[0][0].at("level").get<int>() == 2);
  CHECK(parsed.at("parent").size() == fx.fam.size());
}

TEST_CASE("ap stratification buckets the chain") {
  const ChainFixture fx;
  const Weight w =
      Weight::from_cell_averages(fx.mesh, std::vector<double>{1.0, 1.0, 1.0, 4.0});
  const WeightPair pair = WeightPair::discrete(w, 2.0);
  const ApStratification strat = stratify_ap(fx.S, pair);
  // Local values: 1.421875 (root), 1 ([0,2)), 1 ([0,1)); buckets (2^{a-1}, 2^a].
  REQUIRE(strat.bucket_of.size() == 3);
  CHECK(strat.bucket_of[fx.root] == 1);
  CHECK(strat.bucket_of[fx.mid] == 0);
  CHECK(strat.bucket_of[fx.small] == 0);
  CHECK(strat.min_bucket == 0);
  CHECK(strat.max_bucket == 1);
  CHECK(strat.cap == 0);  // floor(log2 of global sup 1.5625)
}

TEST_CASE("random admissible families decompose consistently") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Mesh mesh(0.0, std::ldexp(1.0, -5), 5);
    const WeightedFamily fam = random_weighted_family(mesh, rng, 2.0);
    REQUIRE(fam.size() >= 1);
    CHECK(fam.balance_c() <= fam.balance_C());
    const CoronaResult res = corona_decompose(fam);

    std::size_t in_generations = 0;
    for (const auto& gen : res.generations) in_generations += gen.size();
    std::size_t stopping = 0;
    for (std::size_t i = 0; i < fam.size(); ++i) stopping += res.stopping[i] ? 1 : 0;
    CHECK(in_generations == stopping);

    for (std::size_t i = 0; i < fam.size(); ++i) {
      const std::int64_t sp = res.stop_parent[i];
      REQUIRE(sp >= 0);
      CHECK(res.stopping[static_cast<std::size_t>(sp)]);
      if (!res.stopping[i])
        CHECK(fam.score(i) <= 2.0 * fam.score(static_cast<std::size_t>(sp)));
      const double t = fam.score(i) / fam.score(static_cast<std::size_t>(sp));
      const int b = static_cast<int>(res.ratio_class[i]);
      CHECK(std::ldexp(1.0, -b) < t);
      CHECK(t <= std::ldexp(1.0, 1 - b));
    }

    const CoronaBoundCheck bound = verify_corona_bound(fam, res, 2.0);
    CHECK(bound.lhs > 0.0);
    CHECK(bound.rhs > 0.0);
    CHECK(std::isfinite(bound.ratio));
  }
}
