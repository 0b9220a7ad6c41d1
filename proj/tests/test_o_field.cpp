#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cspf/o_field.hpp"
#include "cspf/rng.hpp"
#include "oracles.hpp"

using namespace cspf;

namespace {
constexpr double kInvE = 0.36787944117144233;
constexpr double kInf = std::numeric_limits<double>::infinity();

VehicleState moving(int id, double x, double y, double vx, double vy = 0.0,
                    double width = 2.0) {
  VehicleState s;
  s.vehicle_id = id;
  s.x = x;
  s.y = y;
  s.vx = vx;
  s.vy = vy;
  s.length = 4.5;
  s.width = width;
  return s;
}

// Uniformly random approaching configuration.
struct ApproachingCase {
  Vec2 d;
  Vec2 v;
};

ApproachingCase random_approaching(rng::SplitMix64& g) {
  while (true) {
    const Vec2 d{rng::uniform(g, -200.0, 200.0), rng::uniform(g, -200.0, 200.0)};
    const Vec2 v{rng::uniform(g, -50.0, 50.0), rng::uniform(g, -50.0, 50.0)};
    if (norm(d) > 1e-6 && norm(v) > 0.5 && dot(d, v) < 0.0) return {d, v};
  }
}

}  // namespace

TEST_CASE("cpa regimes") {
  SUBCASE("head-on collinear") {
    const CpaResult c = cpa({20.0, 0.0}, {-5.0, 0.0});
    CHECK(c.regime == CpaRegime::approaching);
    CHECK(c.t_m == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(c.d_m == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("lateral offset miss") {
    const CpaResult c = cpa({10.0, 5.0}, {-5.0, 0.0});
    CHECK(c.t_m == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(c.d_m == doctest::Approx(5.0).epsilon(1e-14));
    const auto numeric = oracles::numeric_cpa({10.0, 5.0}, {-5.0, 0.0});
    CHECK(c.t_m == doctest::Approx(numeric.t_m).epsilon(1e-3));
    CHECK(c.d_m == doctest::Approx(numeric.d_m).epsilon(1e-3));
  }
  SUBCASE("receding") {
    const CpaResult c = cpa({10.0, 0.0}, {2.0, 0.0});
    CHECK(c.regime == CpaRegime::receding);
    CHECK(c.t_m == kInf);
    CHECK(c.d_m == kInf);
  }
  SUBCASE("overlap") {
    const CpaResult c = cpa({0.0, 0.0}, {-3.0, 1.0});
    CHECK(c.regime == CpaRegime::overlap);
    CHECK(c.t_m == 0.0);
    CHECK(c.d_m == 0.0);
  }
  SUBCASE("zero relative velocity is receding") {
    CHECK(cpa({10.0, 0.0}, {0.0, 0.0}).regime == CpaRegime::receding);
  }
  SUBCASE("non-finite input") {
    CHECK_THROWS_AS(cpa({std::nan(""), 0.0}, {1.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("cpa matches the numeric scan on random approaching pairs") {
  rng::SplitMix64 g(101);
  for (int i = 0; i < 300; ++i) {
    const auto [d, v] = random_approaching(g);
    const CpaResult c = cpa(d, v);
    REQUIRE(c.regime == CpaRegime::approaching);
    const auto numeric = oracles::numeric_cpa(d, v);
    CHECK(c.t_m == doctest::Approx(numeric.t_m).epsilon(0).scale(1).margin(1e-2));
    CHECK(c.d_m == doctest::Approx(numeric.d_m).epsilon(0).scale(1).margin(1e-2));
  }
}

TEST_CASE("cpa speed-magnitude invariance") {
  rng::SplitMix64 g(103);
  for (int i = 0; i < 200; ++i) {
    const auto [d, v] = random_approaching(g);
    const CpaResult base = cpa(d, v);
    for (double c : {0.1, 2.0, 10.0}) {
      const CpaResult scaled = cpa(d, {c * v.x, c * v.y});
      CHECK(scaled.d_m ==
            doctest::Approx(base.d_m).epsilon(0).margin(1e-9 * std::max(1.0, base.d_m)));
      CHECK(c * scaled.t_m ==
            doctest::Approx(base.t_m).epsilon(0).margin(1e-9 * std::max(1.0, base.t_m)));
    }
  }
}

TEST_CASE("proximity factors") {
  CHECK(spatial_factor(0.0, 2.0, 10.0) == 1.0);
  CHECK(spatial_factor(2.0, 2.0, 10.0) == doctest::Approx(kInvE).epsilon(1e-14));
  CHECK(spatial_factor(kInf, 2.0, 10.0) == 0.0);
  CHECK(temporal_factor(0.0, 7.5, 2.0) == 1.0);
  CHECK(temporal_factor(7.5, 7.5, 2.0) == doctest::Approx(kInvE).epsilon(1e-14));
  CHECK(temporal_factor(kInf, 7.5, 2.0) == 0.0);
}

TEST_CASE("pair_objective_risk") {
  const OFieldParams params;
  SUBCASE("closing lead with full lateral overlap") {
    const auto ego = moving(1, 100.0, 0.0, 30.0);
    const auto other = moving(2, 120.0, 0.0, 25.0);
    // d_m = 0 so only the temporal factor remains: exp(-(4/7.5)^2)
    CHECK(pair_objective_risk(ego, other, params) ==
          doctest::Approx(0.7524321560893032).epsilon(1e-12));
  }
  SUBCASE("receding pair") {
    const auto ego = moving(1, 100.0, 0.0, 30.0);
    const auto other = moving(2, 120.0, 0.0, 35.0);
    CHECK(pair_objective_risk(ego, other, params) == 0.0);
  }
  SUBCASE("coincident centers") {
    const auto ego = moving(1, 100.0, 0.0, 30.0);
    const auto other = moving(2, 100.0, 0.0, 25.0);
    CHECK(pair_objective_risk(ego, other, params) == 1.0);
  }
  SUBCASE("fixed d* override") {
    OFieldParams fixed = params;
    fixed.d_star_rule = OFieldParams::DStarRule::fixed;
    fixed.d_star_fixed = 5.0;
    CHECK(fixed.d_star(2.0, 2.0) == 5.0);
    CHECK(params.d_star(2.0, 2.4) == doctest::Approx(2.2));
  }
}

TEST_CASE("pair_objective_risk is symmetric in vehicle order") {
  const OFieldParams params;
  rng::SplitMix64 g(107);
  for (int i = 0; i < 300; ++i) {
    const auto a = moving(1, rng::uniform(g, -100, 100), rng::uniform(g, -8, 8),
                          rng::uniform(g, 0, 45), rng::uniform(g, -1, 1),
                          rng::uniform(g, 1.8, 2.5));
    const auto b = moving(2, rng::uniform(g, -100, 100), rng::uniform(g, -8, 8),
                          rng::uniform(g, 0, 45), rng::uniform(g, -1, 1),
                          rng::uniform(g, 1.8, 2.5));
    CHECK(pair_objective_risk(a, b, params) == pair_objective_risk(b, a, params));
  }
}

TEST_CASE("regime boundary keeps the specified branch values") {
  const OFieldParams params;
  // At D.V = 0 the pair counts as receding.
  const auto ego = moving(1, 0.0, 0.0, 30.0);
  auto abeam = moving(2, 0.0, 3.7, 30.0);
  CHECK(pair_objective_risk(ego, abeam, params) == 0.0);
  // The moment the dot product turns negative the risk jumps positive.
  abeam.vx = 30.0;
  abeam.vy = -0.5;
  CHECK(pair_objective_risk(ego, abeam, params) > 0.0);
}

TEST_CASE("aggregate_objective") {
  CHECK(aggregate_objective({}) == 0.0);
  const std::vector<double> with_one{0.3, 1.0, 0.2};
  CHECK(aggregate_objective(with_one) == 1.0);
  const std::vector<double> halves{0.5, 0.5};
  CHECK(aggregate_objective(halves) == doctest::Approx(0.75).epsilon(1e-15));
  const std::vector<double> bad{0.5, 1.5};
  CHECK_THROWS_AS(aggregate_objective(bad), std::invalid_argument);

  rng::SplitMix64 g(109);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> risks;
    for (std::size_t k = 0; k < rng::index(g, 6); ++k) {
      risks.push_back(rng::uniform(g, 0.0, 1.0));
    }
    const double agg = aggregate_objective(risks);
    CHECK(agg >= 0.0);
    CHECK(agg <= 1.0);
    risks.push_back(0.3);
    CHECK(aggregate_objective(risks) >= agg);  // monotone under new entries
  }
}
