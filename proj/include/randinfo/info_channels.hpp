#pragma once

// The three information classes (point evaluations, Gaussian functionals,
// Fourier coefficients) and their iid sampling distributions.
//
// The density rho_n of a functional l with respect to the base measure nu is
//
//   rho_n(l) = 1/2 [ (1/n) sum_{k<=n} l(b_k)^2
//                    + sum_{n<k<=M} sigma_k^2 l(b_k)^2 / sum_{k>n} sigma_k^2 ],
//
// and density-weighted draws carry the weights w_i = 1 / rho_n(l_i).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "randinfo/errors.hpp"
#include "randinfo/rng.hpp"
#include "randinfo/spectral_model.hpp"

namespace randinfo {

struct PointEval {
  double x = 0.0;
};

/// Gaussian functional l(f) = sum_k c_k g_k; `g` holds g_1..g_M.
struct GaussianCoefs {
  Eigen::VectorXd g;
};

/// Fourier coefficient l(f) = <f, b_k>, 1-based.
struct FourierIndex {
  std::size_t k = 1;
};

using Functional = std::variant<PointEval, GaussianCoefs, FourierIndex>;

enum class Channel { point, gauss, fourier };

inline std::string to_string(Channel c) {
  switch (c) {
    case Channel::point: return "point";
    case Channel::gauss: return "gauss";
    case Channel::fourier: return "fourier";
  }
  return "unknown";
}

inline Channel channel_of(const Functional& f) {
  return static_cast<Channel>(f.index());
}

struct RhoN {
  std::size_t n = 1;
};
/// Constant density 1/mu(D) on [0,1]; unit weights.
struct ConstantDensity {};
/// Standard Gaussian measure itself; unit weights.
struct PlainGaussian {};

using DensitySpec = std::variant<RhoN, ConstantDensity, PlainGaussian>;

inline std::string to_string(const DensitySpec& d) {
  if (std::holds_alternative<RhoN>(d)) return "rho";
  if (std::holds_alternative<ConstantDensity>(d)) return "uniform";
  return "plain";
}

/// A realized set of N iid functionals with their weights and provenance.
struct InfoDraw {
  Channel channel = Channel::fourier;
  DensitySpec density = RhoN{};
  std::vector<Functional> functionals;
  std::vector<double> weights;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  /// Proposals consumed by rejection sampling (point channel with rho_n).
  std::size_t proposals = 0;
  /// Total mass of the truncated sampling density before renormalization.
  double renormalization = 1.0;

  std::size_t size() const noexcept { return functionals.size(); }
};

/// l(b_1)..l(b_M) for the given functional.
inline void functional_on_basis(const Functional& f, const ModelSpace& model,
                                std::span<double> out) {
  const std::size_t M = out.size();
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointEval>) {
          if (model.basis != BasisKind::trigonometric)
            throw UnsupportedOperation("point evaluation needs the trigonometric basis");
          TrigBasis::eval_all(l.x, out);
        } else if constexpr (std::is_same_v<T, GaussianCoefs>) {
          if (static_cast<std::size_t>(l.g.size()) < M)
            throw OutOfRange("Gaussian functional shorter than the model dimension");
          for (std::size_t k = 0; k < M; ++k) out[k] = l.g[static_cast<Eigen::Index>(k)];
        } else {
          std::fill(out.begin(), out.end(), 0.0);
          if (l.k >= 1 && l.k <= M) out[l.k - 1] = 1.0;
        }
      },
      f);
}

/// l(f) for f = sum_k c_k b_k.
inline double apply(const Functional& functional, const ModelSpace& model, const CoefVector& c) {
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, PointEval>) {
          return eval_function(model, c, l.x);
        } else if constexpr (std::is_same_v<T, GaussianCoefs>) {
          const Eigen::Index m = std::min<Eigen::Index>(l.g.size(), c.c.size());
          return l.g.head(m).dot(c.c.head(m));
        } else {
          return c(l.k);
        }
      },
      functional);
}

/// Evaluates rho_n on one model without recomputing sigma_k^2 per call.
class DensityEvaluator {
 public:
  DensityEvaluator(const ModelSpace& model, std::size_t n) : model_(model), n_(n) {
    const std::size_t M = model.dimension();
    if (n < 1 || n >= M) throw DomainError("rho_n requires 1 <= n < M");
    tail_ = model.spectrum.tail_sum(n).value;
    if (!(tail_ > 0.0)) throw DomainError("rho_n undefined: zero tail (division by zero)");
    sigma2_.resize(M);
    for (std::size_t k = 1; k <= M; ++k) sigma2_[k - 1] = std::pow(model.spectrum.sigma(k), 2);
    scratch_.resize(M);
  }

  std::size_t n() const noexcept { return n_; }
  double tail() const noexcept { return tail_; }
  const std::vector<double>& sigma2() const noexcept { return sigma2_; }

  /// rho_n from precomputed l(b_1)..l(b_M).
  double from_basis_values(std::span<const double> lb) const {
    double head = 0.0;
    for (std::size_t k = 0; k < n_; ++k) head += lb[k] * lb[k];
    double tail = 0.0;
    for (std::size_t k = n_; k < lb.size(); ++k) tail += sigma2_[k] * lb[k] * lb[k];
    return 0.5 * (head / static_cast<double>(n_) + tail / tail_);
  }

  double operator()(const Functional& f) {
    // Fourier functionals are 1-sparse; avoid the O(M) pass.
    if (const auto* fi = std::get_if<FourierIndex>(&f)) return fourier(fi->k);
    functional_on_basis(f, model_, scratch_);
    return from_basis_values(scratch_);
  }

  double fourier(std::size_t k) const {
    if (k <= n_) return 0.5 / static_cast<double>(n_);
    if (k > sigma2_.size()) return 0.0;
    return 0.5 * sigma2_[k - 1] / tail_;
  }

 private:
  const ModelSpace& model_;
  std::size_t n_;
  double tail_ = 0.0;
  std::vector<double> sigma2_;
  std::vector<double> scratch_;
};

inline double density_rho(const ModelSpace& model, std::size_t n, const Functional& functional) {
  DensityEvaluator rho(model, n);
  return rho(functional);
}

/// Counting-measure density of the Fourier channel restricted to 1..M.
struct FourierTable {
  /// Renormalized probabilities of indices 1..M.
  std::vector<double> probabilities;
  /// rho_n(1..M) before renormalization.
  std::vector<double> density;
  /// sum of `density`; the renormalization divides by this.
  double mass = 0.0;
};

inline FourierTable fourier_density_table(const Spectrum& spectrum, std::size_t n, std::size_t M) {
  if (n < 1 || n >= M) throw DomainError("Fourier density requires 1 <= n < M");
  const double tail = spectrum.tail_sum(n).value;
  if (!(tail > 0.0)) throw DomainError("Fourier density undefined: zero tail (division by zero)");
  FourierTable t;
  t.density.resize(M);
  for (std::size_t k = 1; k <= M; ++k) {
    t.density[k - 1] = k <= n ? 0.5 / static_cast<double>(n)
                              : 0.5 * std::pow(spectrum.sigma(k), 2) / tail;
  }
  t.mass = 0.0;
  for (double v : t.density) t.mass += v;
  t.probabilities.resize(M);
  for (std::size_t k = 0; k < M; ++k) t.probabilities[k] = t.density[k] / t.mass;
  return t;
}

/// N iid Fourier indices from rho_n (truncated to the spectrum's M and
/// renormalized); weights use the unrenormalized density.
inline InfoDraw sample_fourier(const Spectrum& spectrum, std::size_t n, std::size_t N,
                               RngStream& rng) {
  const std::size_t M = spectrum.truncation();
  const FourierTable table = fourier_density_table(spectrum, n, M);
  InfoDraw d;
  d.channel = Channel::fourier;
  d.density = RhoN{n};
  d.seed = rng.master;
  d.stream = rng.stream;
  d.renormalization = table.mass;
  d.functionals.reserve(N);
  d.weights.reserve(N);
  std::discrete_distribution<std::size_t> pick(table.probabilities.begin(),
                                               table.probabilities.end());
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t k = pick(rng.engine) + 1;
    d.functionals.push_back(FourierIndex{k});
    d.weights.push_back(1.0 / table.density[k - 1]);
  }
  return d;
}

/// N iid points from rho_n(x) dx by rejection against the uniform proposal.
/// Under the trigonometric convention |b_k|^2 <= 2, so rho_n <= 2 everywhere.
inline InfoDraw sample_points_rho(const ModelSpace& model, std::size_t n, std::size_t N,
                                  RngStream& rng) {
  if (model.basis != BasisKind::trigonometric)
    throw UnsupportedOperation("point sampling needs the trigonometric basis");
  constexpr double kEnvelope = 2.0;
  DensityEvaluator rho(model, n);
  std::vector<double> b(model.dimension());
  InfoDraw d;
  d.channel = Channel::point;
  d.density = RhoN{n};
  d.seed = rng.master;
  d.stream = rng.stream;
  const double kept_tail = rho.tail() - model.spectrum.tail_sum(model.dimension()).value;
  d.renormalization = 0.5 * (1.0 + kept_tail / rho.tail());
  d.functionals.reserve(N);
  d.weights.reserve(N);
  while (d.functionals.size() < N) {
    const double x = rng.uniform();
    const double u = rng.uniform();
    ++d.proposals;
    TrigBasis::eval_all(x, b);
    const double r = rho.from_basis_values(b);
    if (r > kEnvelope * (1.0 + 1e-12))
      throw std::logic_error("rho_n exceeds the rejection envelope; basis convention broken");
    if (u * kEnvelope < r) {
      d.functionals.push_back(PointEval{x});
      d.weights.push_back(1.0 / r);
    }
  }
  return d;
}

/// N iid uniform points on [0,1] with unit weights (unweighted least squares).
inline InfoDraw sample_points_uniform(std::size_t N, RngStream& rng) {
  InfoDraw d;
  d.channel = Channel::point;
  d.density = ConstantDensity{};
  d.seed = rng.master;
  d.stream = rng.stream;
  d.functionals.reserve(N);
  d.weights.assign(N, 1.0);
  for (std::size_t i = 0; i < N; ++i) d.functionals.push_back(PointEval{rng.uniform()});
  d.proposals = N;
  return d;
}

/// N Gaussian functionals with coordinate vectors in R^M.
///
/// Plain mode draws g ~ N(0, I_M) with unit weights. Weighted mode draws
/// exactly from rho_n(g) dgamma(g), which is a mixture: with probability
/// proportional to 1/2 pick k uniformly in 1..n, with probability proportional
/// to beta_k/2 pick k > n; the chosen coordinate then has density g^2 phi(g)
/// (a signed chi variable with three degrees of freedom) and all other
/// coordinates stay standard normal. Weights are 1/rho_n(g).
inline InfoDraw sample_gaussian(const ModelSpace& model, std::size_t n, std::size_t N,
                                RngStream& rng, bool weighted) {
  const std::size_t M = model.dimension();
  InfoDraw d;
  d.channel = Channel::gauss;
  d.seed = rng.master;
  d.stream = rng.stream;
  d.functionals.reserve(N);
  d.weights.reserve(N);
  if (!weighted) {
    if (n < 1 || n > M) throw DomainError("Gaussian sampling requires 1 <= n <= M");
    d.density = PlainGaussian{};
    for (std::size_t i = 0; i < N; ++i) {
      Eigen::VectorXd g(static_cast<Eigen::Index>(M));
      for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = rng.normal();
      d.functionals.push_back(GaussianCoefs{std::move(g)});
      d.weights.push_back(1.0);
    }
    d.proposals = N;
    return d;
  }

  DensityEvaluator rho(model, n);
  d.density = RhoN{n};
  // Component weights: n head components of mass 1/(2n) each, tail component
  // k of mass sigma_k^2 / (2 tail).
  std::vector<double> mix(M);
  for (std::size_t k = 1; k <= M; ++k) mix[k - 1] = rho.fourier(k);
  double mass = 0.0;
  for (double v : mix) mass += v;
  d.renormalization = mass;
  std::discrete_distribution<std::size_t> component(mix.begin(), mix.end());
  std::vector<double> scratch(M);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t k = component(rng.engine);
    Eigen::VectorXd g(static_cast<Eigen::Index>(M));
    for (Eigen::Index j = 0; j < g.size(); ++j) g[j] = rng.normal();
    const double a = rng.normal();
    const double b = rng.normal();
    const double c = rng.normal();
    const double chi = std::sqrt(a * a + b * b + c * c);
    g[static_cast<Eigen::Index>(k)] = rng.uniform() < 0.5 ? -chi : chi;
    for (std::size_t j = 0; j < M; ++j) scratch[j] = g[static_cast<Eigen::Index>(j)];
    const double r = rho.from_basis_values(scratch);
    d.functionals.push_back(GaussianCoefs{std::move(g)});
    d.weights.push_back(1.0 / r);
  }
  d.proposals = N;
  return d;
}

/// sqrt(w_i) l_i(f), i = 1..N.
inline Eigen::VectorXd measure(const InfoDraw& draw, const ModelSpace& model, const CoefVector& c) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(draw.size()));
  for (std::size_t i = 0; i < draw.size(); ++i)
    y[static_cast<Eigen::Index>(i)] =
        std::sqrt(draw.weights[i]) * apply(draw.functionals[i], model, c);
  return y;
}

/// Fourier draw with indices exactly 1..n and unit weights (optimal information).
inline InfoDraw optimal_fourier_draw(std::size_t n) {
  InfoDraw d;
  d.channel = Channel::fourier;
  d.density = RhoN{n};
  for (std::size_t k = 1; k <= n; ++k) {
    d.functionals.push_back(FourierIndex{k});
    d.weights.push_back(1.0);
  }
  return d;
}

}  // namespace randinfo
