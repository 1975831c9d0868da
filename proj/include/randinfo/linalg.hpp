#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace randinfo::linalg {

/// Largest singular value of a dense matrix, via the Gram matrix of its
/// smaller side.
inline double largest_singular_value(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::MatrixXd gram;
  if (a.rows() <= a.cols()) {
    gram = Eigen::MatrixXd::Zero(a.rows(), a.rows());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a);
  } else {
    gram = Eigen::MatrixXd::Zero(a.cols(), a.cols());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// Largest eigenvalue of diag(d2) + A^T A for nonnegative d2 (length m) and
/// A (k x m).
///
/// The eigenvalue lambda > max(d2) solves lambda_max(K(lambda)) = 1 with
/// K(lambda) = A (lambda I - diag(d2))^{-1} A^T, a k x k matrix. The map
/// lambda -> lambda_max(K(lambda)) - 1 is convex and decreasing, so Newton
/// started left of the root converges monotonically. The maximal diagonal
/// entry max_j (d2_j + |a_j|^2) is such a starting point.
inline double max_eig_diag_plus_gram(const Eigen::VectorXd& d2, const Eigen::MatrixXd& a) {
  const Eigen::Index m = d2.size();
  if (m == 0) return 0.0;
  const double dmax = d2.maxCoeff();
  if (a.rows() == 0 || a.squaredNorm() == 0.0) return dmax;

  const Eigen::VectorXd colnorm2 = a.colwise().squaredNorm().transpose();
  double lo = (d2 + colnorm2).maxCoeff();
  double hi = dmax + a.squaredNorm();

  Eigen::VectorXd inv(m);
  auto eval = [&](double lambda, double& h, double& dh) {
    for (Eigen::Index j = 0; j < m; ++j) inv[j] = 1.0 / (lambda - d2[j]);
    const Eigen::MatrixXd scaled = a * inv.asDiagonal();
    Eigen::MatrixXd k = scaled * a.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    const Eigen::Index top = k.rows() - 1;
    const Eigen::VectorXd v = es.eigenvectors().col(top);
    const Eigen::VectorXd atv = a.transpose() * v;
    h = es.eigenvalues()[top] - 1.0;
    dh = -(atv.array().square() * inv.array().square()).sum();
  };

  const double eps = std::numeric_limits<double>::epsilon();
  if (lo <= dmax) lo = dmax * (1.0 + 4.0 * eps) + std::numeric_limits<double>::min();
  double h = 0.0;
  double dh = 0.0;
  eval(lo, h, dh);
  if (h <= 0.0) return lo;

  for (int iter = 0; iter < 200; ++iter) {
    double next = (dh < 0.0) ? lo - h / dh : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next - lo <= 4.0 * eps * next) return next;
    double hn = 0.0;
    double dhn = 0.0;
    eval(next, hn, dhn);
    if (hn > 0.0) {
      lo = next;
      h = hn;
      dh = dhn;
    } else {
      hi = next;
      if (hn == 0.0 || hi - lo <= 4.0 * eps * hi) return next;
    }
  }
  return lo;
}

/// Extreme eigenvalues of a symmetric operator given by its action, using
/// Lanczos with full reorthogonalization. Returns {min, max}.
inline std::pair<double, double> symmetric_extreme_eigenvalues(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, Eigen::Index dim,
    double rel_tol = 1e-12, Eigen::Index max_steps = 300) {
  if (dim == 0) return {0.0, 0.0};
  const Eigen::Index steps = std::min(dim, max_steps);
  Eigen::MatrixXd q(dim, steps + 1);
  std::vector<double> alpha;
  std::vector<double> beta;

  std::mt19937_64 gen(0x5EEDULL);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(gen);
  q.col(0) = v.normalized();

  double lo = 0.0;
  double hi = 0.0;
  for (Eigen::Index j = 0; j < steps; ++j) {
    Eigen::VectorXd w = apply(q.col(j));
    const double a = q.col(j).dot(w);
    alpha.push_back(a);
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass)
      w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
    const double b = w.norm();

    const Eigen::Index k = j + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < k; ++i)
      t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    lo = es.eigenvalues()[0];
    hi = es.eigenvalues()[k - 1];
    const double scale = std::max(std::abs(lo), std::abs(hi));
    const double res_lo = std::abs(b * es.eigenvectors()(k - 1, 0));
    const double res_hi = std::abs(b * es.eigenvectors()(k - 1, k - 1));
    if (b <= rel_tol * std::max(scale, 1e-300) ||
        (res_lo <= rel_tol * scale && res_hi <= rel_tol * scale) || k == dim)
      break;
    beta.push_back(b);
    q.col(j + 1) = w / b;
  }
  return {lo, hi};
}

}  // namespace randinfo::linalg
