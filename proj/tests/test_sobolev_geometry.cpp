#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "randinfo/rng.hpp"
#include "randinfo/sobolev_geometry.hpp"

using namespace randinfo;

namespace {

std::vector<double> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u;
  std::vector<double> xs(n);
  for (auto& x : xs) x = u(gen);
  return xs;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST(PointSet, Validation) {
  EXPECT_THROW(PointSet::line({}), DomainError);
  EXPECT_THROW(PointSet::line({1.5}), DomainError);
  EXPECT_THROW(PointSet::plane({{0.5, -0.1}}), DomainError);
  const auto p = PointSet::line({0.7, 0.2});
  EXPECT_EQ(p.sorted_1d(), (std::vector<double>{0.2, 0.7}));
  EXPECT_EQ(p.points_1d(), (std::vector<double>{0.7, 0.2}));
}

TEST(CoveringRadius, Examples) {
  EXPECT_NEAR(covering_radius(PointSet::line({0.5})), 0.5, 1e-12);
  EXPECT_NEAR(covering_radius(PointSet::line({0.2, 0.6})), 0.4, 1e-12);
  EXPECT_NEAR(covering_radius(PointSet::line({0.25, 0.75})), 0.25, 1e-12);
}

TEST(CoveringRadius, MidpointGrid) {
  for (std::size_t n : {1, 4, 17, 100}) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    EXPECT_NEAR(covering_radius(PointSet::line(xs)), 0.5 / static_cast<double>(n), 1e-14);
  }
}

TEST(DistNorm, Examples) {
  EXPECT_NEAR(dist_norm(PointSet::line({0.5}), 1.0), 0.25, 1e-12);
  EXPECT_NEAR(dist_norm(PointSet::line({0.25, 0.75}), 1.0), 0.125, 1e-12);
  EXPECT_NEAR(dist_norm(PointSet::line({0.5}), 2.0), std::sqrt(1.0 / 12.0), 1e-12);
  EXPECT_NEAR(oracle::dist_norm_quadrature({0.5}, 2.0, 100000), std::sqrt(1.0 / 12.0), 1e-9);
  EXPECT_EQ(dist_norm(PointSet::line({0.3, 0.9}), kInf), covering_radius(PointSet::line({0.3, 0.9})));
}

TEST(DistNorm, ExactMatchesQuadratureOracle) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto xs = random_points(1 + t % 12, t);
    const auto p = PointSet::line(xs);
    for (double g : {1.0, 2.5}) {
      EXPECT_NEAR(dist_norm(p, g), oracle::dist_norm_quadrature(xs, g, 100000), 1e-6)
          << "set " << t << " gamma " << g;
    }
  }
}

TEST(DistNorm, MonotoneInGammaAndBelowCoveringRadius) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto p = PointSet::line(random_points(10, 100 + t));
    double prev = 0.0;
    for (double g : {0.5, 1.0, 2.0, 4.0, 16.0}) {
      const double v = dist_norm(p, g);
      EXPECT_GE(v, prev - 1e-10);
      prev = v;
    }
    EXPECT_LE(prev, covering_radius(p) + 1e-10);
  }
}

TEST(DistNorm, AddingAPointNeverIncreases) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto p = PointSet::line(random_points(6, 200 + t));
    const double extra = random_points(1, 300 + t)[0];
    const auto q = p.with_point(std::vector<double>{extra});
    EXPECT_LE(covering_radius(q), covering_radius(p) + 1e-15);
    for (double g : {1.0, 3.0}) EXPECT_LE(dist_norm(q, g), dist_norm(p, g) + 1e-15);
  }
}

TEST(Geometry2d, GridValuesAgainstBruteForce) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u;
  std::vector<Point2> pts(25);
  for (auto& p : pts) p = {u(gen), u(gen)};
  const auto set = PointSet::plane(pts);
  const std::size_t grid = 64;
  auto nearest = [&](double x, double y) {
    double best = 1e300;
    for (const auto& p : pts) best = std::min(best, std::hypot(x - p[0], y - p[1]));
    return best;
  };
  double h = 0.0;
  double l1 = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      // Covering radius: lattice nodes including the boundary.
      h = std::max(h, nearest(i / double(grid - 1), j / double(grid - 1)));
      // Norms: cell midpoints.
      l1 += nearest((i + 0.5) / grid, (j + 0.5) / grid) / double(grid * grid);
    }
  }
  EXPECT_NEAR(covering_radius(set, grid), h, 1e-12);
  EXPECT_NEAR(dist_norm(set, 1.0, grid), l1, 1e-12);
}

TEST(Geometry2d, SinglePointAtCenter) {
  const auto p = PointSet::plane({{0.5, 0.5}});
  EXPECT_NEAR(covering_radius(p), std::sqrt(0.5), 1e-12);
  EXPECT_LT(dist_norm(p, 1.0), std::sqrt(0.5));
}

TEST(DistReport, InfinityEntryEqualsCoveringRadius) {
  const auto p = PointSet::line({0.1, 0.35, 0.8});
  const std::vector<double> gammas{1.0, 2.0};
  const auto r = dist_report(p, gammas);
  EXPECT_EQ(r.method, "exact-1d");
  EXPECT_EQ(r.l_gamma_norms.at(kInf), r.covering_radius);
  EXPECT_LE(r.l_gamma_norms.at(1.0), r.covering_radius);
  EXPECT_EQ(dist_report(PointSet::plane({{0.2, 0.2}}), gammas, 128).method, "grid-2d:128");
}

TEST(RadiusProxy, Examples) {
  EXPECT_NEAR(radius_proxy(PointSet::line({0.5}), 2, 2, 2), 0.25, 1e-12);
  EXPECT_NEAR(radius_proxy(PointSet::line({0.25, 0.75}), 1, kInf, 1), 0.125, 1e-12);
  EXPECT_NEAR(radius_proxy(PointSet::line({0.0}), 3, 2, 4), 1.0, 1e-12);
  EXPECT_THROW(radius_proxy(PointSet::line({0.5}), 1, 1.0 - 0.5, 2), DomainError);
}

TEST(RadiusProxy, EqualExponentsCollapseToPowerOfH) {
  const auto p = PointSet::line(random_points(9, 5));
  const double h = covering_radius(p);
  for (double s : {1.0, 2.0, 3.0}) EXPECT_NEAR(radius_proxy(p, s, 2, 2), std::pow(h, s), 1e-14);
}

TEST(RadiusProxy, EmbeddingViolated) {
  EXPECT_THROW(radius_proxy(PointSet::plane({{0.5, 0.5}}), 1, 2, 2), DomainError);
  EXPECT_THROW(radius_proxy(PointSet::line({0.5}), 0.4, 2, 2), DomainError);
}

TEST(Mls, ConstantAndLinearReproduction) {
  const auto xs = random_points(30, 17);
  const auto p = PointSet::line(xs);
  std::vector<double> ones(xs.size(), 3.25);
  const auto c = mls_fit(p, ones, 1);
  std::vector<double> lin;
  for (double x : xs) lin.push_back(2.0 * x - 0.5);
  const auto l = mls_fit(p, lin, 1);
  for (int j = 0; j <= 100; ++j) {
    const double x = j / 100.0;
    EXPECT_NEAR(mls_eval(c, x), 3.25, 1e-10);
    EXPECT_NEAR(mls_eval(l, x), 2.0 * x - 0.5, 1e-8);
  }
}

TEST(Mls, PolynomialReproductionRandomSets) {
  for (std::size_t m : {1, 2, 3}) {
    for (std::uint64_t t = 0; t < 20; ++t) {
      const auto xs = random_points(2 * (m + 1) + t, 40 + t);
      std::vector<double> f;
      for (double x : xs) f.push_back(std::pow(x, static_cast<double>(m)) - 0.3 * x);
      const auto model = mls_fit(PointSet::line(xs), f, m);
      for (int j = 0; j <= 64; ++j) {
        const double x = j / 64.0;
        EXPECT_NEAR(mls_eval(model, x), std::pow(x, static_cast<double>(m)) - 0.3 * x, 1e-8);
      }
    }
  }
}

TEST(Mls, SingleWindowIsGlobalWeightedFit) {
  const auto xs = random_points(6, 71);
  std::vector<double> f;
  for (double x : xs) f.push_back(std::sin(5.0 * x));
  const auto model = mls_fit(PointSet::line(xs), f, 2, 2.0);
  ASSERT_EQ(model.window_size(), 6u);
  for (double x : {0.05, 0.4, 0.93}) {
    const auto fit = model.local_fit(x);
    EXPECT_EQ(fit.last - fit.first, 6u);
    std::vector<double> ws;
    for (double y : xs) ws.push_back(bump_weight((y - x) / fit.delta));
    EXPECT_NEAR(mls_eval(model, x), oracle::local_poly_normal_eq(xs, f, ws, 2, x), 1e-9);
  }
}

TEST(Mls, ValueAtSamplePointWithinResidual) {
  const auto xs = random_points(200, 72);
  std::vector<double> f;
  for (double x : xs) f.push_back(std::cos(3.0 * x));
  const auto model = mls_fit(PointSet::line(xs), f, 2);
  for (std::size_t i = 0; i < 10; ++i) {
    const auto fit = model.local_fit(xs[i]);
    EXPECT_LE(std::abs(mls_eval(model, xs[i]) - f[i]), fit.residual + 1e-15);
  }
}

TEST(Mls, Errors) {
  EXPECT_THROW(mls_fit(PointSet::line({0.1, 0.2, 0.3}), std::vector<double>{1, 2, 3}, 1), DomainError);
  EXPECT_THROW(mls_fit(PointSet::line({0.1, 0.2}), std::vector<double>{1}, 0), DomainError);
  EXPECT_THROW(mls_fit(PointSet::plane({{0.1, 0.2}}), std::vector<double>{1}, 0), UnsupportedOperation);
  const auto m = mls_fit(PointSet::line({0.1, 0.5, 0.9}), std::vector<double>{1, 1, 1}, 0);
  EXPECT_THROW(mls_eval(m, 1.5), DomainError);
  std::vector<double> small(10, 0.0);
  EXPECT_THROW(mls_error(small, m, 1.0), DomainError);
}

TEST(MlsError, PolynomialAtNoiseFloorAndNormOrdering) {
  const auto xs = random_points(64, 81);
  std::vector<double> quad;
  std::vector<double> wave;
  for (double x : xs) {
    quad.push_back(x * x);
    wave.push_back(std::sin(2.0 * M_PI * x));
  }
  const auto pm = mls_fit(PointSet::line(xs), quad, 2);
  EXPECT_LE(mls_error([](double x) { return x * x; }, pm, kInf, 512), 1e-8);
  const auto wm = mls_fit(PointSet::line(xs), wave, 2);
  const auto f = [](double x) { return std::sin(2.0 * M_PI * x); };
  EXPECT_GE(mls_error(f, wm, kInf, 512), mls_error(f, wm, 1.0, 512));
}

TEST(MlsError, MoreSamplesUsuallyHelp) {
  int better = 0;
  const auto f = [](double x) { return std::sin(2.0 * M_PI * x); };
  for (std::uint64_t t = 0; t < 100; ++t) {
    RngStream rng(91, t);
    auto fit_error = [&](std::size_t n) {
      std::vector<double> xs(n);
      for (auto& x : xs) x = rng.uniform();
      std::vector<double> v;
      for (double x : xs) v.push_back(f(x));
      return mls_error(f, mls_fit(PointSet::line(xs), v, 2), kInf, 256);
    };
    const double small = fit_error(128);
    const double large = fit_error(1024);
    better += large < small;
  }
  EXPECT_GE(better, 95);
}
