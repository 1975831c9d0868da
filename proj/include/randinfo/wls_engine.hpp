#pragma once

// Weighted least squares on V_n = span{b_1..b_n} from an InfoDraw:
//
//   A_N(f) = argmin_{g in V_n} sum_i w_i |l_i(f - g)|^2,
//
// together with the spectral quantities that control its error on the unit
// ball B_H and an exact (truncated) worst-case error oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "randinfo/errors.hpp"
#include "randinfo/info_channels.hpp"
#include "randinfo/linalg.hpp"
#include "randinfo/spectral_model.hpp"

namespace randinfo {

/// Singular values below this fraction of s_1(G) are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

/// G_ik = sqrt(w_i) l_i(b_k) for k <= n; T_raw holds the same for n < k <= M;
/// T_scaled has column k multiplied by sigma_k.
struct InfoMatrices {
  Eigen::MatrixXd G;
  Eigen::MatrixXd T_raw;
  Eigen::MatrixXd T_scaled;
  /// sigma_{n+1}..sigma_M.
  Eigen::VectorXd tail_sigma;
  std::size_t N = 0;
  std::size_t n = 0;
  std::size_t M = 0;
};

inline InfoMatrices assemble(const InfoDraw& draw, const ModelSpace& model, std::size_t n) {
  const std::size_t N = draw.size();
  const std::size_t M = model.dimension();
  if (n < 1 || n > N || n > M)
    throw DomainError("assemble requires 1 <= n <= min(N, M)");
  if (draw.weights.size() != N) throw DomainError("weights and functionals differ in length");

  InfoMatrices m;
  m.N = N;
  m.n = n;
  m.M = M;
  const auto Ni = static_cast<Eigen::Index>(N);
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ti = static_cast<Eigen::Index>(M - n);
  m.G.resize(Ni, ni);
  m.T_raw.resize(Ni, ti);
  m.tail_sigma.resize(ti);
  for (Eigen::Index k = 0; k < ti; ++k)
    m.tail_sigma[k] = model.spectrum.sigma(n + 1 + static_cast<std::size_t>(k));

  std::vector<double> row(M);
  for (std::size_t i = 0; i < N; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double sw = std::sqrt(draw.weights[i]);
    if (const auto* fi = std::get_if<FourierIndex>(&draw.functionals[i])) {
      m.G.row(ii).setZero();
      m.T_raw.row(ii).setZero();
      const std::size_t k = fi->k;
      if (k <= n) m.G(ii, static_cast<Eigen::Index>(k - 1)) = sw;
      else if (k <= M) m.T_raw(ii, static_cast<Eigen::Index>(k - n - 1)) = sw;
      continue;
    }
    functional_on_basis(draw.functionals[i], model, row);
    for (Eigen::Index k = 0; k < ni; ++k) m.G(ii, k) = sw * row[static_cast<std::size_t>(k)];
    for (Eigen::Index k = 0; k < ti; ++k)
      m.T_raw(ii, k) = sw * row[static_cast<std::size_t>(k + ni)];
  }
  m.T_scaled = m.T_raw * m.tail_sigma.asDiagonal();
  return m;
}

/// alpha_hat = s_n(G), beta_hat = s_1(T_scaled).
struct SpectralCheck {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double s1_G = 0.0;
  bool pass = false;
};

/// Least squares solver on the thin SVD of G; cutoff kRankTolerance * s_1(G).
class LeastSquaresSolver {
 public:
  explicit LeastSquaresSolver(const Eigen::MatrixXd& G)
      : svd_(G, Eigen::ComputeThinU | Eigen::ComputeThinV) {
    const auto& s = svd_.singularValues();
    s1_ = s.size() > 0 ? s[0] : 0.0;
    alpha_ = s.size() > 0 ? s[s.size() - 1] : 0.0;
    // A singular value of exactly zero means the full column rank is lost
    // even when s_1(G) is itself zero.
    pass_ = G.rows() >= G.cols() && alpha_ > kRankTolerance * s1_ && alpha_ > 0.0;
  }

  double alpha_hat() const noexcept { return alpha_; }
  double s1() const noexcept { return s1_; }
  bool pass() const noexcept { return pass_; }

  /// G^+ y with small singular values dropped.
  Eigen::VectorXd pinv_apply(const Eigen::VectorXd& y) const {
    const auto& s = svd_.singularValues();
    Eigen::VectorXd uty = svd_.matrixU().transpose() * y;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      uty[k] = s[k] > kRankTolerance * s1_ ? uty[k] / s[k] : 0.0;
    return svd_.matrixV() * uty;
  }

  /// G^+ X for a block of right-hand sides.
  Eigen::MatrixXd pinv_apply(const Eigen::MatrixXd& x) const {
    const auto& s = svd_.singularValues();
    Eigen::MatrixXd utx = svd_.matrixU().transpose() * x;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s[k] > kRankTolerance * s1_) utx.row(k) /= s[k];
      else utx.row(k).setZero();
    }
    return svd_.matrixV() * utx;
  }

 private:
  Eigen::JacobiSVD<Eigen::MatrixXd> svd_;
  double s1_ = 0.0;
  double alpha_ = 0.0;
  bool pass_ = false;
};

inline SpectralCheck spectral_check(const InfoMatrices& mats) {
  const LeastSquaresSolver solver(mats.G);
  SpectralCheck c;
  c.alpha_hat = solver.alpha_hat();
  c.s1_G = solver.s1();
  c.pass = solver.pass();
  c.beta_hat = linalg::largest_singular_value(mats.T_scaled);
  return c;
}

/// Head coefficients G^+ y, zero-padded to length M.
inline CoefVector solve(const InfoMatrices& mats, const Eigen::VectorXd& measurements) {
  const LeastSquaresSolver solver(mats.G);
  if (!solver.pass()) throw ReconstructionFailure(solver.alpha_hat());
  if (static_cast<std::size_t>(measurements.size()) != mats.N)
    throw DomainError("measurement vector length differs from N");
  CoefVector out = CoefVector::zero(mats.M);
  out.c.head(static_cast<Eigen::Index>(mats.n)) = solver.pinv_apply(measurements);
  return out;
}

struct WceOracle {
  double value = 0.0;
  /// False when G is rank deficient; value is then the diameter sigma_1 of
  /// the zero estimator.
  bool pass = false;
};

/// Worst-case L2 error of A_N over B_H, truncated at M.
///
/// For ||f||_H <= 1 write the tail as c_tail = D u with |u| <= 1 and
/// D = diag(sigma_{n+1..M}); the error is [-G^+ T_raw D; D] u, so the wce is
/// the largest singular value of that block matrix, i.e.
/// sqrt(lambda_max(D^2 + A^T A)) with A = G^+ T_scaled.
inline WceOracle wce_exact(const InfoMatrices& mats, const Spectrum& spectrum) {
  const LeastSquaresSolver solver(mats.G);
  if (!solver.pass()) return {spectrum.sigma(1), false};
  if (mats.T_scaled.cols() == 0) return {0.0, true};
  const Eigen::MatrixXd a = solver.pinv_apply(mats.T_scaled);
  const Eigen::VectorXd d2 = mats.tail_sigma.array().square();
  return {std::sqrt(linalg::max_eig_diag_plus_gram(d2, a)), true};
}

/// sigma_{n+1} + beta_hat / alpha_hat, or +inf when the check failed.
inline double wce_bound(const SpectralCheck& check, const Spectrum& spectrum, std::size_t n) {
  if (!check.pass) return std::numeric_limits<double>::infinity();
  return spectrum.sigma_or_zero(n + 1) + check.beta_hat / check.alpha_hat;
}

/// ||c - A_N c||_L2 over the model's M coefficients.
inline double local_error(const ModelSpace& model, const CoefVector& c, const InfoMatrices& mats,
                          const Eigen::VectorXd& measurements) {
  const CoefVector rec = solve(mats, measurements);
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dimension()));
  full.head(c.c.size()) = c.c;
  return (full - rec.c).norm();
}

/// max_j |f(x_j) - (A_N f)(x_j)| on the grid x_j = j / grid_size, j < grid_size.
inline double sup_error(const ModelSpace& model, const CoefVector& c, const InfoMatrices& mats,
                        const Eigen::VectorXd& measurements, std::size_t grid_size) {
  if (model.basis != BasisKind::trigonometric)
    throw UnsupportedOperation("sup_error needs the trigonometric basis");
  if (grid_size == 0) throw DomainError("grid_size must be positive");
  const CoefVector rec = solve(mats, measurements);
  Eigen::VectorXd diff = -rec.c;
  diff.head(c.c.size()) += c.c;
  const CoefVector err(diff);
  double worst = 0.0;
  for (std::size_t j = 0; j < grid_size; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(grid_size);
    worst = std::max(worst, std::abs(eval_function(model, err, x)));
  }
  return worst;
}

/// || (1/N) sum_i y_i y_i^* - E || over indices 1..M, where
/// (y_i)_k = sqrt(w_i) l_i(b_k) for k <= n and sqrt(w_i) sigma_k l_i(b_k) / gamma_n
/// for k > n, gamma_n = max{sigma_{n+1}, sqrt(tail/n)}, and
/// E = diag(1, ..., 1, sigma_k^2 / gamma_n^2, ...).
inline double concentration_stat(const InfoDraw& draw, const ModelSpace& model, std::size_t n) {
  const std::size_t M = model.dimension();
  const std::size_t N = draw.size();
  if (N == 0) throw DomainError("concentration_stat needs at least one functional");
  if (n < 1 || n >= M) throw DomainError("concentration_stat requires 1 <= n < M");
  const Spectrum& spectrum = model.spectrum;
  const double tail = spectrum.tail_sum(n).value;
  const double gamma =
      std::max(spectrum.sigma(n + 1), std::sqrt(tail / static_cast<double>(n)));

  Eigen::VectorXd scale(static_cast<Eigen::Index>(M));
  Eigen::VectorXd expected(static_cast<Eigen::Index>(M));
  for (std::size_t k = 1; k <= M; ++k) {
    const auto ki = static_cast<Eigen::Index>(k - 1);
    scale[ki] = k <= n ? 1.0 : spectrum.sigma(k) / gamma;
    expected[ki] = scale[ki] * scale[ki];
  }
  const double invN = 1.0 / static_cast<double>(N);

  if (draw.channel == Channel::fourier) {
    // Every y_i has a single nonzero entry, so the deviation is diagonal.
    Eigen::VectorXd diag = -expected;
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t k = std::get<FourierIndex>(draw.functionals[i]).k;
      if (k < 1 || k > M) continue;
      const auto ki = static_cast<Eigen::Index>(k - 1);
      diag[ki] += invN * draw.weights[i] * scale[ki] * scale[ki];
    }
    return diag.cwiseAbs().maxCoeff();
  }

  Eigen::MatrixXd y(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(M));
  std::vector<double> row(M);
  for (std::size_t i = 0; i < N; ++i) {
    functional_on_basis(draw.functionals[i], model, row);
    const double sw = std::sqrt(draw.weights[i]);
    for (std::size_t k = 0; k < M; ++k)
      y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          sw * row[k] * scale[static_cast<Eigen::Index>(k)];
  }
  const auto op = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd yv = y * v;
    Eigen::VectorXd out = invN * (y.transpose() * yv);
    out -= expected.cwiseProduct(v);
    return out;
  };
  const auto [lo, hi] =
      linalg::symmetric_extreme_eigenvalues(op, static_cast<Eigen::Index>(M), 1e-10);
  return std::max(std::abs(lo), std::abs(hi));
}

/// One row of a worst-case error experiment.
struct WceReport {
  std::string channel;
  std::string density;
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t M = 0;
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double wce_exact = 0.0;
  double wce_bound = 0.0;
  double theorem_bound = 0.0;
  double truncation_bias = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Assembles, checks, and evaluates the exact oracle for one draw. The
/// neglected indices k > M contribute at most sigma_{M+1} (1 + beta/alpha).
inline WceReport evaluate_wce(const InfoDraw& draw, const ModelSpace& model, std::size_t n,
                              double theorem_bound) {
  const InfoMatrices mats = assemble(draw, model, n);
  const SpectralCheck check = spectral_check(mats);
  const WceOracle oracle = wce_exact(mats, model.spectrum);
  WceReport r;
  r.channel = to_string(draw.channel);
  r.density = to_string(draw.density);
  r.n = n;
  r.N = draw.size();
  r.M = model.dimension();
  r.alpha_hat = check.alpha_hat;
  r.beta_hat = check.beta_hat;
  r.wce_exact = oracle.value;
  r.wce_bound = wce_bound(check, model.spectrum, n);
  r.theorem_bound = theorem_bound;
  const double ratio = check.pass ? check.beta_hat / check.alpha_hat
                                  : std::numeric_limits<double>::infinity();
  const double beyond = model.spectrum.sigma_or_zero(r.M + 1);
  r.truncation_bias = beyond > 0.0 ? beyond * (1.0 + ratio) : 0.0;
  r.pass = check.pass && oracle.pass;
  r.seed = draw.seed;
  r.stream = draw.stream;
  return r;
}

/// sigma_{N+1} - bias - 1e-9 <= wce <= sigma_{n+1} + beta/alpha + 1e-9 (pass rows only).
inline bool sandwich_holds(const WceReport& r, const Spectrum& spectrum) {
  if (!r.pass) return true;
  const double lower = spectrum.sigma_or_zero(r.N + 1) - r.truncation_bias - 1e-9;
  return r.wce_exact >= lower && r.wce_exact <= r.wce_bound + 1e-9;
}

}  // namespace randinfo
