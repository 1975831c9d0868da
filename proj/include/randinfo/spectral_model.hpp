#pragma once

// Sequence-space model of a Hilbert space H compactly embedded in L2[0,1]:
// H is the ellipsoid whose semi-axes against an L2-orthonormal basis {b_k}
// are the singular values sigma_1 >= sigma_2 >= ... > 0. All objects here are
// finite-rank: indices run over 1..M (the working truncation).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sf_zeta.h>

#include "randinfo/errors.hpp"

namespace randinfo {

enum class SpectrumKind { power_law, power_log, geometric, explicit_values };

inline std::string to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::power_law: return "power_law";
    case SpectrumKind::power_log: return "power_log";
    case SpectrumKind::geometric: return "geometric";
    case SpectrumKind::explicit_values: return "explicit";
  }
  return "unknown";
}

/// Result of a tail sum sum_{k>n} sigma_k^2.
struct TailSum {
  double value = 0.0;
  /// Upper estimate of the part beyond the truncation that `value` omits
  /// (zero for closed forms and for finite explicit spectra).
  double truncation_bias = 0.0;
  bool analytic = false;
  /// The full tail diverges; `value` is the truncated sum only.
  bool divergent = false;
};

/// Nonincreasing positive sequence sigma_k with a working truncation M.
///
/// Analytic kinds define sigma_k for every k >= 1; an explicit spectrum is
/// finite and sigma_k = 0 is implied beyond its length.
///   power_law(a):     sigma_k = k^-a
///   power_log(a, b):  sigma_k = k^-a (1 + ln k)^b
///   geometric(q):     sigma_k = q^k
class Spectrum {
 public:
  static constexpr std::size_t kDefaultTruncation = 512;

  static Spectrum power_law(double alpha, std::size_t truncation = kDefaultTruncation) {
    if (!(alpha > 0.0)) throw DomainError("power_law exponent must be positive");
    Spectrum s(SpectrumKind::power_law, truncation);
    s.alpha_ = alpha;
    return s;
  }

  static Spectrum power_log(double alpha, double beta,
                            std::size_t truncation = kDefaultTruncation) {
    if (!(alpha > 0.0)) throw DomainError("power_log exponent must be positive");
    Spectrum s(SpectrumKind::power_log, truncation);
    s.alpha_ = alpha;
    s.beta_ = beta;
    // d/dt log sigma(t) = -a/t + b/(t (1 + ln t)) <= 0 for all t >= 1 iff b <= a.
    if (beta > alpha) throw DomainError("power_log requires beta <= alpha to be nonincreasing");
    return s;
  }

  static Spectrum geometric(double q, std::size_t truncation = kDefaultTruncation) {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("geometric ratio must lie in (0,1)");
    Spectrum s(SpectrumKind::geometric, truncation);
    s.q_ = q;
    return s;
  }

  static Spectrum explicit_values(std::vector<double> values) {
    if (values.empty()) throw DomainError("explicit spectrum must be nonempty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0)) throw DomainError("explicit spectrum must be strictly positive");
      if (i > 0 && values[i] > values[i - 1])
        throw DomainError("explicit spectrum must be nonincreasing");
    }
    Spectrum s(SpectrumKind::explicit_values, values.size());
    s.values_ = std::move(values);
    return s;
  }

  SpectrumKind kind() const noexcept { return kind_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double q() const noexcept { return q_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Working dimension M.
  std::size_t truncation() const noexcept { return truncation_; }

  /// Same sequence with a different working dimension. Explicit spectra are
  /// finite: M may shrink but never exceed the number of stored values.
  Spectrum truncated(std::size_t M) const {
    if (M == 0) throw DomainError("truncation must be positive");
    Spectrum s = *this;
    if (kind_ == SpectrumKind::explicit_values) {
      if (M > values_.size()) throw OutOfRange("explicit spectrum cannot be extended");
      s.values_.resize(M);
    }
    s.truncation_ = M;
    return s;
  }

  /// sigma_k, 1-based.
  double sigma(std::size_t k) const {
    if (k == 0) throw OutOfRange("sigma index is 1-based");
    switch (kind_) {
      case SpectrumKind::power_law:
        return std::pow(static_cast<double>(k), -alpha_);
      case SpectrumKind::power_log: {
        const double kd = static_cast<double>(k);
        return std::pow(kd, -alpha_) * std::pow(1.0 + std::log(kd), beta_);
      }
      case SpectrumKind::geometric:
        return std::pow(q_, static_cast<double>(k));
      case SpectrumKind::explicit_values:
        if (k > values_.size()) throw OutOfRange("sigma index beyond explicit spectrum");
        return values_[k - 1];
    }
    return 0.0;
  }

  /// sigma_k, with the finite explicit spectrum continued by zeros.
  double sigma_or_zero(std::size_t k) const {
    if (kind_ == SpectrumKind::explicit_values && k > values_.size()) return 0.0;
    return sigma(k);
  }

  /// True when sum_k sigma_k^2 < infinity.
  bool square_summable() const noexcept {
    switch (kind_) {
      case SpectrumKind::power_law: return alpha_ > 0.5;
      case SpectrumKind::power_log: return alpha_ > 0.5 || (alpha_ == 0.5 && beta_ < -0.5);
      case SpectrumKind::geometric:
      case SpectrumKind::explicit_values: return true;
    }
    return false;
  }

  /// sum_{k>n} sigma_k^2. Closed forms are used for geometric and convergent
  /// power-law spectra; otherwise the sum runs to M and the neglected part is
  /// bounded by sigma_{M+1}^2 times an estimate of the residual count.
  TailSum tail_sum(std::size_t n) const {
    TailSum t;
    switch (kind_) {
      case SpectrumKind::explicit_values:
        t.value = truncated_tail(n);
        t.analytic = true;
        return t;
      case SpectrumKind::geometric: {
        const double q2 = q_ * q_;
        t.value = std::pow(q2, static_cast<double>(n + 1)) / (1.0 - q2);
        t.analytic = true;
        return t;
      }
      case SpectrumKind::power_law:
        if (alpha_ > 0.5) {
          t.value = hurwitz_zeta(2.0 * alpha_, static_cast<double>(n + 1));
          t.analytic = true;
          return t;
        }
        t.value = truncated_tail(n);
        t.divergent = true;
        return t;
      case SpectrumKind::power_log: {
        t.value = truncated_tail(n);
        if (!square_summable()) {
          t.divergent = true;
          return t;
        }
        // The terms are nonincreasing, so sum_{k>S} f(k) <= f(S+1) + int_{S+1}^inf f.
        // With u = 1 + ln x and c = 2a - 1 the integral is e^c c^-(2b+1) Gamma(2b+1, c u).
        const std::size_t start = std::max(n, truncation_);
        const double first = std::pow(sigma(start + 1), 2);
        const double u = 1.0 + std::log(static_cast<double>(start + 1));
        const double c = 2.0 * alpha_ - 1.0;
        const double a = 2.0 * beta_ + 1.0;
        const double integral = c > 0.0 ? std::exp(c) * std::pow(c, -a) * upper_gamma(a, c * u)
                                        : std::pow(u, a) / -a;
        t.truncation_bias = first + integral;
        return t;
      }
    }
    return t;
  }

  /// sqrt((1/n) sum_{k>n} sigma_k^2), the benchmark rate for n-term recovery.
  double benchmark_bound(std::size_t n) const {
    if (n == 0) throw DomainError("benchmark_bound requires n >= 1");
    const TailSum t = tail_sum(n);
    if (t.divergent) throw DivergentSpectrum("spectrum tail is not square summable");
    return std::sqrt(t.value / static_cast<double>(n));
  }

  /// sum_{n<k<=M} sigma_k^2: the part of the tail inside the working dimension.
  double truncated_tail(std::size_t n) const {
    double s = 0.0;
    // Summing from the small end keeps the rounding error relative to the result.
    for (std::size_t k = truncation_; k > n; --k) s += std::pow(sigma(k), 2);
    return s;
  }

  /// sigma_1..sigma_M.
  Eigen::VectorXd head_values() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(truncation_));
    for (std::size_t k = 1; k <= truncation_; ++k) v[static_cast<Eigen::Index>(k - 1)] = sigma(k);
    return v;
  }

 private:
  Spectrum(SpectrumKind kind, std::size_t truncation) : kind_(kind), truncation_(truncation) {
    if (truncation == 0) throw DomainError("truncation must be positive");
  }


  static double hurwitz_zeta(double s, double q) {
    // GSL's default handler aborts; status codes are checked instead. Swapping the
    // handler per call would race between worker threads, so it is switched off once.
    [[maybe_unused]] static const bool handler_off = (gsl_set_error_handler_off(), true);
    gsl_sf_result r;
    const int status = gsl_sf_hzeta_e(s, q, &r);
    if (status != GSL_SUCCESS) throw DomainError("Hurwitz zeta evaluation failed");
    return r.val;
  }

  static double upper_gamma(double a, double x) {
    [[maybe_unused]] static const bool handler_off = (gsl_set_error_handler_off(), true);
    gsl_sf_result r;
    if (gsl_sf_gamma_inc_e(a, x, &r) != GSL_SUCCESS)
      throw DomainError("incomplete gamma evaluation failed");
    return r.val;
  }

  SpectrumKind kind_;
  std::size_t truncation_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  double q_ = 0.0;
  std::vector<double> values_;
};

/// Real trigonometric system on [0,1]:
/// b_1 = 1, b_{2j} = sqrt2 cos(2 pi j x), b_{2j+1} = sqrt2 sin(2 pi j x).
struct TrigBasis {
  static double eval(std::size_t k, double x) {
    if (k == 0) throw OutOfRange("basis index is 1-based");
    if (k == 1) return 1.0;
    const double j = static_cast<double>(k / 2);
    const double arg = 2.0 * std::numbers::pi * j * x;
    return std::numbers::sqrt2 * ((k % 2 == 0) ? std::cos(arg) : std::sin(arg));
  }

  /// Writes b_1(x)..b_M(x) into `out` (M = out.size()). Uses the angle
  /// addition recurrence; the drift is O(M eps).
  static void eval_all(double x, std::span<double> out) {
    const std::size_t M = out.size();
    if (M == 0) return;
    out[0] = 1.0;
    const double theta = 2.0 * std::numbers::pi * x;
    const double c1 = std::cos(theta);
    const double s1 = std::sin(theta);
    double c = c1;
    double s = s1;
    for (std::size_t k = 2; k <= M; k += 2) {
      out[k - 1] = std::numbers::sqrt2 * c;
      if (k < M) out[k] = std::numbers::sqrt2 * s;
      const double cn = c * c1 - s * s1;
      s = s * c1 + c * s1;
      c = cn;
    }
  }
};

/// Function f = sum_k c_k b_k stored by its L2 coefficients; c_k lives at index k-1.
struct CoefVector {
  Eigen::VectorXd c;

  CoefVector() = default;
  explicit CoefVector(Eigen::VectorXd values) : c(std::move(values)) {}
  CoefVector(std::initializer_list<double> values) : c(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double v : values) c[i++] = v;
  }

  static CoefVector zero(std::size_t M) {
    return CoefVector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M)));
  }
  /// e_k, 1-based.
  static CoefVector unit(std::size_t M, std::size_t k) {
    CoefVector v = zero(M);
    v.c[static_cast<Eigen::Index>(k - 1)] = 1.0;
    return v;
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(c.size()); }
  /// c_k, 1-based; zero beyond the stored length.
  double operator()(std::size_t k) const {
    return k >= 1 && k <= size() ? c[static_cast<Eigen::Index>(k - 1)] : 0.0;
  }
};

enum class BasisKind { trigonometric, coordinate };

/// The pair (H, L2): a spectrum plus the basis it is diagonal in. The
/// coordinate basis is abstract and only supports channels that never
/// evaluate pointwise.
struct ModelSpace {
  Spectrum spectrum;
  BasisKind basis = BasisKind::trigonometric;

  std::size_t dimension() const noexcept { return spectrum.truncation(); }
};

inline double sigma(const Spectrum& spectrum, std::size_t k) { return spectrum.sigma(k); }
inline TailSum tail_sum(const Spectrum& spectrum, std::size_t n) { return spectrum.tail_sum(n); }
inline double benchmark_bound(const Spectrum& spectrum, std::size_t n) {
  return spectrum.benchmark_bound(n);
}
inline double eval_basis(std::size_t k, double x) { return TrigBasis::eval(k, x); }

/// f(x) = sum_{k<=len(c)} c_k b_k(x).
inline double eval_function(const ModelSpace& model, const CoefVector& c, double x) {
  if (model.basis != BasisKind::trigonometric)
    throw UnsupportedOperation("point evaluation needs the trigonometric basis");
  std::vector<double> b(c.size());
  TrigBasis::eval_all(x, b);
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) s += c.c[static_cast<Eigen::Index>(k)] * b[k];
  return s;
}

struct Norms {
  double l2 = 0.0;
  double h = 0.0;
};

/// (||f||_L2, ||f||_H) with ||f||_H^2 = sum c_k^2 / sigma_k^2.
inline Norms norms(const ModelSpace& model, const CoefVector& c) {
  if (c.size() > model.dimension()) throw OutOfRange("coefficient vector longer than model");
  double l2 = 0.0;
  double h = 0.0;
  for (std::size_t k = 1; k <= c.size(); ++k) {
    const double ck = c(k);
    l2 += ck * ck;
    if (ck != 0.0) h += std::pow(ck / model.spectrum.sigma(k), 2);
  }
  return {std::sqrt(l2), std::sqrt(h)};
}

/// P_n c: keeps c_1..c_n, zeroes the rest.
inline CoefVector project_head(const CoefVector& c, std::size_t n) {
  if (n > c.size()) throw OutOfRange("projection rank exceeds coefficient length");
  CoefVector p = c;
  p.c.tail(static_cast<Eigen::Index>(c.size() - n)).setZero();
  return p;
}

}  // namespace randinfo
