#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "randinfo/linalg.hpp"
#include "randinfo/wls_engine.hpp"

using namespace randinfo;

namespace {

InfoMatrices make_mats(const Eigen::MatrixXd& G, const Eigen::MatrixXd& T_raw, const Spectrum& s) {
  InfoMatrices m;
  m.G = G;
  m.T_raw = T_raw;
  m.N = static_cast<std::size_t>(G.rows());
  m.n = static_cast<std::size_t>(G.cols());
  m.M = m.n + static_cast<std::size_t>(T_raw.cols());
  m.tail_sigma.resize(T_raw.cols());
  for (Eigen::Index k = 0; k < T_raw.cols(); ++k)
    m.tail_sigma[k] = s.sigma(m.n + 1 + static_cast<std::size_t>(k));
  m.T_scaled = T_raw * m.tail_sigma.asDiagonal();
  return m;
}

Eigen::VectorXd sigmas(const Spectrum& s, std::size_t M) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(M));
  for (std::size_t k = 1; k <= M; ++k) v[static_cast<Eigen::Index>(k - 1)] = s.sigma(k);
  return v;
}

InfoDraw draw_for(Channel ch, const ModelSpace& m, std::size_t n, std::size_t N, RngStream& rng) {
  switch (ch) {
    case Channel::fourier: return sample_fourier(m.spectrum, n, N, rng);
    case Channel::point: return sample_points_rho(m, n, N, rng);
    case Channel::gauss: return sample_gaussian(m, n, N, rng, true);
  }
  return {};
}

CoefVector random_unit_h(const Spectrum& s, std::size_t M, RngStream& rng) {
  CoefVector c = CoefVector::zero(M);
  double h2 = 0.0;
  for (std::size_t k = 1; k <= M; ++k) {
    const double u = rng.normal();
    c.c[static_cast<Eigen::Index>(k - 1)] = u * s.sigma(k);
    h2 += u * u;
  }
  c.c /= std::sqrt(h2);
  return c;
}

}  // namespace

TEST(Assemble, OptimalFourierIsIdentity) {
  const ModelSpace m{Spectrum::power_law(1.0, 32), BasisKind::coordinate};
  const auto mats = assemble(optimal_fourier_draw(6), m, 6);
  EXPECT_EQ(mats.G, Eigen::MatrixXd::Identity(6, 6));
  EXPECT_EQ(mats.T_raw.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assemble, PointDrawFirstColumnIsSqrtWeights) {
  const ModelSpace m{Spectrum::power_law(1.0, 32), BasisKind::trigonometric};
  RngStream rng(1, 0);
  const auto d = sample_points_rho(m, 5, 40, rng);
  const auto mats = assemble(d, m, 5);
  for (std::size_t i = 0; i < d.size(); ++i)
    EXPECT_NEAR(mats.G(static_cast<Eigen::Index>(i), 0), std::sqrt(d.weights[i]), 1e-15);
}

TEST(Assemble, PlainGaussianEntriesAreRawValues) {
  const ModelSpace m{Spectrum::power_law(1.0, 20), BasisKind::coordinate};
  RngStream rng(2, 0);
  const auto d = sample_gaussian(m, 4, 8, rng, false);
  const auto mats = assemble(d, m, 4);
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& g = std::get<GaussianCoefs>(d.functionals[i]).g;
    const auto ii = static_cast<Eigen::Index>(i);
    EXPECT_EQ(mats.G.row(ii), g.head(4).transpose());
    EXPECT_EQ(mats.T_raw.row(ii), g.tail(16).transpose());
  }
}

TEST(Assemble, TScaledColumnsAreSigmaScaled) {
  const ModelSpace m{Spectrum::power_law(1.3, 40), BasisKind::trigonometric};
  RngStream rng(3, 0);
  const auto mats = assemble(sample_points_rho(m, 7, 50, rng), m, 7);
  for (Eigen::Index k = 0; k < mats.T_raw.cols(); ++k) {
    const double s = m.spectrum.sigma(8 + static_cast<std::size_t>(k));
    EXPECT_LE((mats.T_scaled.col(k) - s * mats.T_raw.col(k)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Assemble, DimensionErrors) {
  const ModelSpace m{Spectrum::power_law(1.0, 16), BasisKind::coordinate};
  EXPECT_THROW(assemble(optimal_fourier_draw(4), m, 5), DomainError);
  EXPECT_THROW(assemble(optimal_fourier_draw(4), m, 0), DomainError);
}

TEST(SpectralCheck, IdentityAndRankDeficiency) {
  const auto s = Spectrum::power_law(1.0, 10);
  const auto id = spectral_check(make_mats(Eigen::MatrixXd::Identity(4, 4), Eigen::MatrixXd::Zero(4, 6), s));
  EXPECT_DOUBLE_EQ(id.alpha_hat, 1.0);
  EXPECT_EQ(id.beta_hat, 0.0);
  EXPECT_TRUE(id.pass);

  Eigen::MatrixXd rep(3, 3);
  rep << 1, 2, 3, 1, 2, 3, 0, 1, 1;
  const auto bad = spectral_check(make_mats(rep, Eigen::MatrixXd::Zero(3, 7), s));
  EXPECT_NEAR(bad.alpha_hat, 0.0, 1e-14);
  EXPECT_FALSE(bad.pass);
}

TEST(SpectralCheck, GaussianAlphaAboveFifthWhp) {
  const auto s = Spectrum::power_law(1.0, 64);
  const ModelSpace m{s, BasisKind::coordinate};
  int good = 0;
  for (std::size_t t = 0; t < 100; ++t) {
    RngStream rng(77, t);
    auto d = sample_gaussian(m, 16, 32, rng, false);
    for (auto& w : d.weights) w = 1.0 / 32.0;
    good += spectral_check(assemble(d, m, 16)).alpha_hat >= 0.2;
  }
  EXPECT_GE(good, 95);
}

TEST(Solve, Examples) {
  const auto s = Spectrum::power_law(1.0, 6);
  const auto mats = make_mats(2.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(2, 4), s);
  const CoefVector c = solve(mats, Eigen::Vector2d(2.0, 4.0));
  EXPECT_EQ(c.size(), 6u);
  EXPECT_NEAR(c(1), 1.0, 1e-15);
  EXPECT_NEAR(c(2), 2.0, 1e-15);
  EXPECT_EQ(c(3), 0.0);
  EXPECT_EQ(solve(mats, Eigen::Vector2d::Zero()).c.norm(), 0.0);
}

TEST(Solve, FailureCarriesAlpha) {
  const auto s = Spectrum::power_law(1.0, 6);
  Eigen::MatrixXd g(2, 2);
  g << 1, 1, 1, 1;
  const auto mats = make_mats(g, Eigen::MatrixXd::Zero(2, 4), s);
  try {
    solve(mats, Eigen::Vector2d(1.0, 1.0));
    FAIL() << "expected ReconstructionFailure";
  } catch (const ReconstructionFailure& e) {
    EXPECT_LT(e.alpha_hat(), 1e-14);
  }
}

TEST(Solve, ExactOnHeadSpaceForEveryChannel) {
  for (Channel ch : {Channel::fourier, Channel::point, Channel::gauss}) {
    const ModelSpace m{Spectrum::power_law(1.0, 48),
                       ch == Channel::point ? BasisKind::trigonometric : BasisKind::coordinate};
    for (std::size_t t = 0; t < 5; ++t) {
      RngStream rng(21, t);
      const auto d = draw_for(ch, m, 6, 80, rng);
      const auto mats = assemble(d, m, 6);
      if (!spectral_check(mats).pass) continue;
      CoefVector c = CoefVector::zero(48);
      for (Eigen::Index k = 0; k < 6; ++k) c.c[k] = rng.normal();
      const CoefVector rec = solve(mats, measure(d, m, c));
      EXPECT_LE((rec.c - c.c).norm(), 1e-9 * c.c.norm()) << to_string(ch);
      EXPECT_LE(local_error(m, c, mats, measure(d, m, c)), 1e-10 * c.c.norm());
    }
  }
}

TEST(WceExact, OptimalInformationEqualsNextSigma) {
  const auto s = Spectrum::power_law(1.0, 512);
  const ModelSpace m{s, BasisKind::coordinate};
  for (std::size_t n : {4, 16, 64}) {
    const auto w = wce_exact(assemble(optimal_fourier_draw(n), m, n), s);
    EXPECT_TRUE(w.pass);
    EXPECT_NEAR(w.value, s.sigma(n + 1), 1e-10 * s.sigma(n + 1));
  }
}

TEST(WceExact, NoTailGivesZero) {
  const auto s = Spectrum::explicit_values({1.0, 0.5, 0.25});
  Eigen::MatrixXd g(4, 3);
  g << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 1;
  const auto w = wce_exact(make_mats(g, Eigen::MatrixXd::Zero(4, 0), s), s);
  EXPECT_TRUE(w.pass);
  EXPECT_EQ(w.value, 0.0);
}

TEST(WceExact, TwoByOneBlockByHand) {
  const double sig2 = 0.3;
  const double t = 1.7;
  const auto s = Spectrum::explicit_values({1.0, sig2});
  Eigen::MatrixXd g(1, 1);
  g << 1.0;
  Eigen::MatrixXd tr(1, 1);
  tr << t;
  const auto w = wce_exact(make_mats(g, tr, s), s);
  EXPECT_NEAR(w.value, sig2 * std::sqrt(1.0 + t * t), 1e-14);
}

TEST(WceExact, FailureFallsBackToDiameter) {
  const auto s = Spectrum::power_law(1.0, 6);
  const auto w = wce_exact(make_mats(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Ones(3, 4), s), s);
  EXPECT_FALSE(w.pass);
  EXPECT_EQ(w.value, 1.0);
}

TEST(WceExact, MatchesDenseSvdOracle) {
  for (Channel ch : {Channel::fourier, Channel::point, Channel::gauss}) {
    const auto s = Spectrum::power_law(1.0, 40);
    const ModelSpace m{s, ch == Channel::point ? BasisKind::trigonometric : BasisKind::coordinate};
    for (std::size_t t = 0; t < 8; ++t) {
      RngStream rng(31, t);
      const std::size_t n = 3 + t % 5;
      const auto mats = assemble(draw_for(ch, m, n, 30, rng), m, n);
      const auto w = wce_exact(mats, s);
      if (!w.pass) continue;
      const double ref = oracle::wce_dense(mats.G, mats.T_raw, sigmas(s, 40));
      EXPECT_NEAR(w.value, ref, 1e-11 * ref) << to_string(ch) << " trial " << t;
    }
  }
}

TEST(WceExact, RandomDirectionsNeverExceedOracle) {
  const auto s = Spectrum::power_law(1.0, 48);
  const ModelSpace m{s, BasisKind::trigonometric};
  RngStream rng(41, 0);
  const auto d = sample_points_rho(m, 6, 60, rng);
  const auto mats = assemble(d, m, 6);
  const double wce = wce_exact(mats, s).value;
  double best = 0.0;
  for (int i = 0; i < 200; ++i) {
    const CoefVector c = random_unit_h(s, 48, rng);
    best = std::max(best, local_error(m, c, mats, measure(d, m, c)));
  }
  EXPECT_LE(best, wce * (1.0 + 1e-12));
  // Power iteration on E^T E with E the error operator reaches the oracle.
  Eigen::VectorXd u = Eigen::VectorXd::Ones(48).normalized();
  const Eigen::VectorXd sig = sigmas(s, 48);
  const LeastSquaresSolver solver(mats.G);
  Eigen::MatrixXd phi(mats.N, 48);
  phi << mats.G, mats.T_raw;
  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(48, 48);
  e.topRows(6) -= solver.pinv_apply(phi);
  e = e * sig.asDiagonal();
  double est = 0.0;
  for (int it = 0; it < 2000; ++it) {
    u = e.transpose() * (e * u);
    est = std::sqrt(u.norm());
    u.normalize();
  }
  // Power iteration is a lower bound that converges to the oracle.
  EXPECT_LE(est, wce * (1.0 + 1e-12));
  EXPECT_LE(wce, 1.2 * est);
}

TEST(WceBound, Examples) {
  const auto s = Spectrum::explicit_values({1.0, 0.2, 0.1});
  EXPECT_DOUBLE_EQ(wce_bound({1.0, 0.0, 1.0, true}, s, 1), 0.2);
  EXPECT_NEAR(wce_bound({0.5, 0.1, 1.0, true}, s, 1), 0.4, 1e-15);
  EXPECT_TRUE(std::isinf(wce_bound({0.0, 0.1, 1.0, false}, s, 1)));
}

TEST(WceBound, DominatesOracleAndLowerBoundHolds) {
  for (Channel ch : {Channel::fourier, Channel::point, Channel::gauss}) {
    const auto s = Spectrum::power_law(1.0, 96);
    const ModelSpace m{s, ch == Channel::point ? BasisKind::trigonometric : BasisKind::coordinate};
    for (std::size_t t = 0; t < 10; ++t) {
      RngStream rng(51, t);
      const auto r = evaluate_wce(draw_for(ch, m, 8, 40, rng), m, 8, 0.0);
      if (!r.pass) continue;
      EXPECT_LE(r.wce_exact, r.wce_bound + 1e-9);
      EXPECT_TRUE(sandwich_holds(r, s));
    }
  }
}

TEST(LocalError, Examples) {
  const auto s = Spectrum::power_law(1.0, 32);
  const ModelSpace m{s, BasisKind::coordinate};
  const auto d = optimal_fourier_draw(5);
  const auto mats = assemble(d, m, 5);
  const CoefVector c = CoefVector::unit(32, 6);
  CoefVector tail = c;
  tail.c *= s.sigma(6);
  EXPECT_NEAR(local_error(m, tail, mats, measure(d, m, tail)), s.sigma(6), 1e-15);
}

TEST(LocalError, LocalInequalityOnRandomFunctions) {
  const auto s = Spectrum::power_law(1.0, 64);
  const ModelSpace m{s, BasisKind::trigonometric};
  RngStream rng(61, 0);
  const auto d = sample_points_rho(m, 8, 80, rng);
  const auto mats = assemble(d, m, 8);
  const auto chk = spectral_check(mats);
  ASSERT_TRUE(chk.pass);
  const double factor = s.sigma(9) + chk.beta_hat / chk.alpha_hat;
  for (int i = 0; i < 100; ++i) {
    CoefVector c = CoefVector::zero(64);
    for (Eigen::Index k = 0; k < 64; ++k) c.c[k] = rng.normal() * s.sigma(static_cast<std::size_t>(k) + 1);
    double tail_h2 = 0.0;
    for (std::size_t k = 9; k <= 64; ++k) tail_h2 += std::pow(c(k) / s.sigma(k), 2);
    EXPECT_LE(local_error(m, c, mats, measure(d, m, c)), factor * std::sqrt(tail_h2) + 1e-9);
  }
}

TEST(SupError, ReproductionMonotonicityAndNormComparison) {
  const auto s = Spectrum::power_law(1.5, 64);
  const ModelSpace m{s, BasisKind::trigonometric};
  RngStream rng(71, 0);
  const auto d = sample_points_rho(m, 9, 90, rng);
  const auto mats = assemble(d, m, 9);
  CoefVector head = CoefVector::zero(64);
  for (Eigen::Index k = 0; k < 9; ++k) head.c[k] = rng.normal();
  EXPECT_LE(sup_error(m, head, mats, measure(d, m, head), 256), 1e-8);

  CoefVector c = CoefVector::zero(64);
  for (Eigen::Index k = 0; k < 64; ++k) c.c[k] = rng.normal() * s.sigma(static_cast<std::size_t>(k) + 1);
  const auto y = measure(d, m, c);
  for (std::size_t g : {64, 128, 256})
    EXPECT_GE(sup_error(m, c, mats, y, 2 * g), sup_error(m, c, mats, y, g) - 1e-12);
  EXPECT_GE(sup_error(m, c, mats, y, 1024), local_error(m, c, mats, y) * (1.0 - 1e-3));
}

TEST(Concentration, SingleDrawIsPositive) {
  const ModelSpace m{Spectrum::power_law(1.0, 32), BasisKind::coordinate};
  RngStream rng(81, 0);
  EXPECT_GT(concentration_stat(sample_fourier(m.spectrum, 4, 1, rng), m, 4), 0.0);
}

TEST(Concentration, LargeSampleSmallDeviation) {
  const ModelSpace m{Spectrum::geometric(0.5, 40), BasisKind::coordinate};
  RngStream rng(82, 0);
  EXPECT_LT(concentration_stat(sample_fourier(m.spectrum, 4, 10000, rng), m, 4), 0.1);
}

TEST(Concentration, LanczosMatchesDenseEigenvalues) {
  const ModelSpace m{Spectrum::power_law(1.0, 30), BasisKind::trigonometric};
  RngStream rng(83, 0);
  const auto d = sample_points_rho(m, 5, 60, rng);
  const double stat = concentration_stat(d, m, 5);
  const double tail = m.spectrum.tail_sum(5).value;
  const double gamma = std::max(m.spectrum.sigma(6), std::sqrt(tail / 5.0));
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(30, 30);
  for (std::size_t i = 0; i < d.size(); ++i) {
    Eigen::VectorXd y(30);
    const double x = std::get<PointEval>(d.functionals[i]).x;
    for (std::size_t k = 1; k <= 30; ++k) {
      const double sc = k <= 5 ? 1.0 : m.spectrum.sigma(k) / gamma;
      y[static_cast<Eigen::Index>(k - 1)] = std::sqrt(d.weights[i]) * oracle::trig(k, x) * sc;
    }
    acc += y * y.transpose() / static_cast<double>(d.size());
  }
  for (std::size_t k = 1; k <= 30; ++k) {
    const double sc = k <= 5 ? 1.0 : m.spectrum.sigma(k) / gamma;
    acc(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k - 1)) -= sc * sc;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(acc);
  const double ref = es.eigenvalues().cwiseAbs().maxCoeff();
  EXPECT_NEAR(stat, ref, 1e-9 * ref);
}

TEST(Linalg, SecularSolverMatchesDenseEigenvalue) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    const int k = 1 + t % 6;
    const int mcols = 3 + t;
    Eigen::MatrixXd a(k, mcols);
    Eigen::VectorXd d2(mcols);
    for (int j = 0; j < mcols; ++j) {
      d2[j] = std::pow(1.0 / (j + 2.0), 2);
      for (int i = 0; i < k; ++i) a(i, j) = g(gen) * 0.1 / (j + 1.0);
    }
    Eigen::MatrixXd full = a.transpose() * a;
    full.diagonal() += d2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(full);
    const double ref = es.eigenvalues().maxCoeff();
    EXPECT_NEAR(linalg::max_eig_diag_plus_gram(d2, a), ref, 1e-13 * ref);
  }
}

TEST(Linalg, LargestSingularValueMatchesSvd) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> g;
  for (auto [r, c] : {std::pair{3, 9}, std::pair{9, 3}, std::pair{5, 5}}) {
    Eigen::MatrixXd a(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) a(i, j) = g(gen);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    EXPECT_NEAR(linalg::largest_singular_value(a), svd.singularValues()(0), 1e-12);
  }
}

TEST(WceReport, FieldsAndBias) {
  const auto s = Spectrum::power_law(1.0, 64);
  const ModelSpace m{s, BasisKind::coordinate};
  RngStream rng(91, 4);
  const auto r = evaluate_wce(sample_fourier(s, 4, 40, rng), m, 4, 0.5);
  EXPECT_EQ(r.channel, "fourier");
  EXPECT_EQ(r.density, "rho");
  EXPECT_EQ(r.N, 40u);
  EXPECT_EQ(r.M, 64u);
  EXPECT_EQ(r.theorem_bound, 0.5);
  EXPECT_EQ(r.seed, 91u);
  EXPECT_EQ(r.stream, 4u);
  if (r.pass) EXPECT_NEAR(r.truncation_bias, s.sigma(65) * (1.0 + r.beta_hat / r.alpha_hat), 1e-15);
}
