#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cspf/calibration.hpp"
#include "cspf/fixtures.hpp"
#include "cspf/rng.hpp"
#include "oracles.hpp"

using namespace cspf;

namespace {

// Spacing-like distances: a soft void near zero with the bulk at the scale.
double lognormal(rng::SplitMix64& g, double scale, double sigma) {
  return scale * std::exp(sigma * rng::normal(g));
}

std::vector<SpacingSample> lognormal_samples(int n, double scale_x, double scale_y,
                                             std::uint64_t seed, double velocity = 20.0,
                                             int vehicles = 20) {
  rng::SplitMix64 g(seed);
  std::vector<SpacingSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    SpacingSample s;
    s.dx = lognormal(g, scale_x, 0.35) * (rng::uniform01(g) < 0.5 ? -1.0 : 1.0);
    s.dy = lognormal(g, scale_y, 0.30) * (rng::uniform01(g) < 0.5 ? -1.0 : 1.0);
    s.kind = SampleKind::vehicle;
    s.ego_velocity = velocity;
    s.vehicle_id = 1 + i % vehicles;
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("log_likelihood") {
  const Ggd2d p{10.0, 3.0, 1.4, 5.0};
  SUBCASE("far samples contribute nothing") {
    const std::vector<SpacingSample> s{{500.0, 0.0, SampleKind::vehicle, 20.0, 1}};
    CHECK(log_likelihood(s, p) == doctest::Approx(0.0).epsilon(0).margin(1e-12));
  }
  SUBCASE("a sample at the scale distance") {
    const std::vector<SpacingSample> s{{10.0, 0.0, SampleKind::vehicle, 20.0, 1}};
    CHECK(log_likelihood(s, p) ==
          doctest::Approx(-0.4586751453870819).epsilon(1e-12));
  }
  SUBCASE("empty input") { CHECK(log_likelihood({}, p) == 0.0); }
  SUBCASE("floored at exact contact") {
    const std::vector<SpacingSample> s{{0.0, 0.0, SampleKind::vehicle, 20.0, 1}};
    CHECK(log_likelihood(s, p) == doctest::Approx(std::log(1e-12)));
  }
  SUBCASE("marker samples use the lateral pair") {
    const std::vector<SpacingSample> s{{0.0, 1.4, SampleKind::lane_marker, 20.0, 1}};
    CHECK(log_likelihood(s, p) ==
          doctest::Approx(std::log(1.0 - std::exp(-1.0))).epsilon(1e-12));
  }
  SUBCASE("constraint violation") {
    CHECK_THROWS_AS(log_likelihood({}, Ggd2d{0.0, 3.0, 1.0, 5.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(log_likelihood({}, Ggd2d{1.0, 1.5, 1.0, 5.0}),
                    std::invalid_argument);
  }
  SUBCASE("shrinking a distance can only lower the likelihood") {
    rng::SplitMix64 g(3);
    for (int i = 0; i < 100; ++i) {
      std::vector<SpacingSample> s{
          {rng::uniform(g, 1.0, 40.0), rng::uniform(g, 0.2, 4.0),
           SampleKind::vehicle, 20.0, 1}};
      const double before = log_likelihood(s, p);
      s[0].dx *= 0.9;
      CHECK(log_likelihood(s, p) <= before);
    }
  }
}

TEST_CASE("infer_beta against the exhaustive grid") {
  const auto samples = lognormal_samples(1000, 18.0, 1.8, 555);
  const Ggd2d ctx{12.0, 3.0, 1.2, 5.0};
  SUBCASE("longitudinal") {
    const double impl = infer_beta(samples, Axis::longitudinal, ctx);
    const double grid = oracles::grid_beta(samples, Axis::longitudinal, ctx);
    CHECK(impl == doctest::Approx(grid).epsilon(0).margin(1e-3));
    CHECK(impl >= kBetaLo);
    CHECK(impl <= kBetaHi);
  }
  SUBCASE("lateral") {
    const double impl = infer_beta(samples, Axis::lateral, ctx);
    const double grid = oracles::grid_beta(samples, Axis::lateral, ctx);
    CHECK(impl == doctest::Approx(grid).epsilon(0).margin(1e-3));
  }
  SUBCASE("flat objective ties to the lower bound") {
    // distances so large that every beta gives likelihood ~ 0
    std::vector<SpacingSample> flat;
    for (int i = 0; i < 50; ++i) {
      flat.push_back({5000.0, 0.0, SampleKind::vehicle, 20.0, 1});
    }
    CHECK(infer_beta(flat, Axis::longitudinal, ctx) == kBetaLo);
  }
  SUBCASE("empty samples") {
    CHECK_THROWS_AS(infer_beta({}, Axis::longitudinal, ctx), std::invalid_argument);
  }
}

TEST_CASE("infer_gamma against the exhaustive grid") {
  const auto samples = lognormal_samples(1000, 18.0, 1.8, 777);
  const Ggd2d ctx{12.0, 3.0, 1.2, 5.0};
  SUBCASE("longitudinal") {
    const double impl = infer_gamma(samples, Axis::longitudinal, ctx);
    const double grid = oracles::grid_gamma(samples, Axis::longitudinal, ctx);
    CHECK(impl == doctest::Approx(grid).epsilon(0).margin(1e-3));
    CHECK(impl >= kGammaLo);
    CHECK(impl <= kGammaHi);
  }
  SUBCASE("scale equivariance") {
    auto doubled = samples;
    for (auto& s : doubled) {
      s.dx *= 2.0;
      s.dy *= 2.0;
    }
    Ggd2d ctx2 = ctx;
    ctx2.gamma_x *= 2.0;
    ctx2.gamma_y *= 2.0;
    const double base = infer_gamma(samples, Axis::longitudinal, ctx);
    const double scaled = infer_gamma(doubled, Axis::longitudinal, ctx2);
    CHECK(scaled / base == doctest::Approx(2.0).epsilon(0.02));
  }
  SUBCASE("empty samples") {
    CHECK_THROWS_AS(infer_gamma({}, Axis::lateral, ctx), std::invalid_argument);
  }
}

TEST_CASE("infer_params alternation") {
  const auto samples = lognormal_samples(2000, 18.0, 1.8, 999);
  const InferResult a = infer_params(samples);
  SUBCASE("deterministic") {
    const InferResult b = infer_params(samples);
    CHECK(a.params.gamma_x == b.params.gamma_x);
    CHECK(a.params.beta_x == b.params.beta_x);
    CHECK(a.params.gamma_y == b.params.gamma_y);
    CHECK(a.params.beta_y == b.params.beta_y);
    CHECK(a.converged);
  }
  SUBCASE("fixed point of the two sub-problems") {
    CHECK(std::abs(infer_gamma(samples, Axis::longitudinal, a.params) -
                   a.params.gamma_x) <= 1e-3);
    CHECK(std::abs(infer_beta(samples, Axis::longitudinal, a.params) -
                   a.params.beta_x) <= 1e-3);
    CHECK(std::abs(infer_gamma(samples, Axis::lateral, a.params) -
                   a.params.gamma_y) <= 1e-3);
    CHECK(std::abs(infer_beta(samples, Axis::lateral, a.params) -
                   a.params.beta_y) <= 1e-3);
  }
  SUBCASE("degenerate lateral column") {
    auto flat = samples;
    for (auto& s : flat) s.dy = 0.0;
    const InferResult r = infer_params(flat);
    CHECK(r.lateral_degenerate);
    CHECK(r.params.gamma_y == kGammaLo);
  }
  SUBCASE("vehicle-kind precondition") {
    std::vector<SpacingSample> markers{{0.0, 1.2, SampleKind::lane_marker, 20.0, 1}};
    CHECK_THROWS_AS(infer_params(markers), std::invalid_argument);
  }
}

TEST_CASE("bin_by_velocity") {
  std::vector<SpacingSample> samples;
  auto add = [&](double v, int id) {
    samples.push_back({10.0, 1.0, SampleKind::vehicle, v, id});
  };
  add(19.6, 1);
  add(20.4, 2);
  add(20.5, 3);  // half-up boundary
  const auto bins = bin_by_velocity(samples, 1, 1);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].velocity == 20);
  CHECK(bins[0].samples.size() == 2);
  CHECK(bins[1].velocity == 21);
  CHECK(bins[1].samples.size() == 1);

  SUBCASE("insufficient bins are flagged") {
    const auto strict = bin_by_velocity(samples, 500, 10);
    for (const auto& b : strict) CHECK_FALSE(b.sufficient);
  }
}

TEST_CASE("bootstrap_bin protocol") {
  // 12 vehicles; each vehicle owns a block of samples.
  std::vector<SpacingSample> samples;
  rng::SplitMix64 g(2024);
  for (int id = 1; id <= 12; ++id) {
    for (int k = 0; k < 60; ++k) {
      samples.push_back({lognormal(g, 18.0, 0.35), lognormal(g, 1.8, 0.3),
                         SampleKind::vehicle, 20.0, id});
    }
  }
  auto bins = bin_by_velocity(samples, 500, 10);
  REQUIRE(bins.size() == 1);
  REQUIRE(bins[0].sufficient);

  const BinResult a = bootstrap_bin(bins[0], 20, 0.85, 11);
  CHECK(a.n_iterations == 20);
  CHECK(a.draws_per_iteration == 11);  // ceil(0.85 * 12)
  CHECK(a.n_samples == 720);
  CHECK(a.n_vehicles == 12);
  CHECK(a.gamma_x > kGammaLo);
  CHECK(a.beta_x >= kBetaLo);

  SUBCASE("deterministic per seed") {
    const BinResult b = bootstrap_bin(bins[0], 20, 0.85, 11);
    CHECK(a.gamma_x == b.gamma_x);
    CHECK(a.std_gamma_x == b.std_gamma_x);
    const BinResult c = bootstrap_bin(bins[0], 20, 0.85, 12);
    CHECK(a.gamma_x != c.gamma_x);
  }
  SUBCASE("invariant to reordering whole vehicles") {
    CalibrationBin shuffled = bins[0];
    std::stable_sort(shuffled.samples.begin(), shuffled.samples.end(),
                     [](const SpacingSample& lhs, const SpacingSample& rhs) {
                       return lhs.vehicle_id > rhs.vehicle_id;
                     });
    const BinResult b = bootstrap_bin(shuffled, 20, 0.85, 11);
    CHECK(a.gamma_x == b.gamma_x);
    CHECK(a.beta_y == b.beta_y);
  }
  SUBCASE("identical vehicles give zero spread") {
    std::vector<SpacingSample> clones;
    for (int id = 1; id <= 10; ++id) {
      for (int k = 0; k < 60; ++k) {
        clones.push_back({12.0 + 0.1 * k, 1.5 + 0.01 * k, SampleKind::vehicle,
                          20.0, id});
      }
    }
    auto cb = bin_by_velocity(clones, 500, 10);
    REQUIRE(cb.size() == 1);
    const BinResult r = bootstrap_bin(cb[0], 20, 0.85, 5);
    CHECK(r.std_gamma_x == 0.0);
    CHECK(r.std_beta_x == 0.0);
  }
  SUBCASE("insufficient bin is rejected") {
    CalibrationBin thin;
    thin.velocity = 20;
    thin.sufficient = false;
    CHECK_THROWS_AS(bootstrap_bin(thin, 20, 0.85, 1), std::invalid_argument);
  }
}

TEST_CASE("fit_velocity_polynomials") {
  SUBCASE("exact cubic recovery") {
    const std::array<double, 4> cg{1.2925, 1.0621, -3.7051e-2, 5.1053e-4};
    const std::array<double, 4> cb{3.2589, 9.6673e-3, -1.4834e-3, 2.2214e-5};
    std::vector<BinResult> bins;
    for (int v = 3; v <= 42; ++v) {
      BinResult r;
      r.velocity = v;
      r.gamma_x = ((cg[3] * v + cg[2]) * v + cg[1]) * v + cg[0];
      r.beta_x = ((cb[3] * v + cb[2]) * v + cb[1]) * v + cb[0];
      r.gamma_y = 1.4310;
      r.beta_y = 4.9956;
      r.sufficient = true;
      bins.push_back(r);
    }
    const SFieldParams p = fit_velocity_polynomials(bins);
    for (int j = 0; j < 4; ++j) {
      CHECK(p.gamma_x_poly[static_cast<std::size_t>(j)] ==
            doctest::Approx(cg[static_cast<std::size_t>(j)]).epsilon(0).margin(1e-9));
      CHECK(p.beta_x_poly[static_cast<std::size_t>(j)] ==
            doctest::Approx(cb[static_cast<std::size_t>(j)]).epsilon(0).margin(1e-9));
    }
    CHECK(p.gamma_y == doctest::Approx(1.4310).epsilon(1e-12));
    CHECK(p.beta_y == doctest::Approx(4.9956).epsilon(1e-12));
  }
  SUBCASE("underdetermined fit is rejected") {
    std::vector<BinResult> bins(3);
    bins[0].velocity = 10;
    bins[1].velocity = 20;
    bins[2].velocity = 30;
    CHECK_THROWS_AS(fit_velocity_polynomials(bins, 3), std::invalid_argument);
  }
}

TEST_CASE("collect_spacings counting") {
  SUBCASE("isolated vehicle between two markers") {
    const Dataset ds = synthesize_fixture(
        R"({"frame_rate": 25, "duration_s": 1,
            "lanes": {"markers": [1.85, 5.55], "boundaries": [-1.85, 9.25]},
            "maneuvers": [{"type": "constant", "x0": 0, "y0": 3.7, "speed": 20}]})",
        0);
    const auto samples = collect_spacings(ds);
    const std::size_t frames = ds.tracks.at(1).size();
    std::size_t vehicles = 0, markers = 0, boundaries = 0;
    for (const auto& s : samples) {
      vehicles += s.kind == SampleKind::vehicle;
      markers += s.kind == SampleKind::lane_marker;
      boundaries += s.kind == SampleKind::boundary;
    }
    CHECK(vehicles == 0);
    CHECK(markers == 2 * frames);
    CHECK(boundaries == frames);
  }
  SUBCASE("two-car convoy yields a sample per perspective") {
    const Dataset ds = synthesize_fixture(
        R"({"frame_rate": 25, "duration_s": 1, "maneuvers":
            [{"type": "convoy", "count": 2, "speed": 20, "gap_mean": 20}]})",
        0);
    const auto samples = collect_spacings(ds);
    std::size_t vehicles = 0;
    for (const auto& s : samples) vehicles += s.kind == SampleKind::vehicle;
    CHECK(vehicles == 2 * ds.tracks.at(1).size());
  }
  SUBCASE("empty dataset") {
    const Dataset ds = synthesize_fixture(R"({"duration_s": 1, "maneuvers": []})", 0);
    CHECK(collect_spacings(ds).empty());
  }
}
