#pragma once

// Geometry of point sets in [0,1]^d (d = 1, 2): the distance function
// dist(x, P) = min_{y in P} |x - y|, its L_gamma norms and supremum (the
// covering radius), and a one-dimensional moving least squares method.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "randinfo/errors.hpp"

namespace randinfo {

using Point2 = std::array<double, 2>;

class PointSet {
 public:
  static PointSet line(std::vector<double> xs) {
    if (xs.empty()) throw DomainError("point set must be nonempty");
    for (double x : xs)
      if (!(x >= 0.0 && x <= 1.0)) throw DomainError("points must lie in [0,1]");
    PointSet p;
    p.dimension_ = 1;
    p.points1_ = std::move(xs);
    p.sorted1_ = p.points1_;
    std::sort(p.sorted1_.begin(), p.sorted1_.end());
    return p;
  }

  static PointSet plane(std::vector<Point2> pts) {
    if (pts.empty()) throw DomainError("point set must be nonempty");
    for (const auto& q : pts)
      for (double x : q)
        if (!(x >= 0.0 && x <= 1.0)) throw DomainError("points must lie in [0,1]^2");
    PointSet p;
    p.dimension_ = 2;
    p.points2_ = std::move(pts);
    return p;
  }

  int dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept {
    return dimension_ == 1 ? points1_.size() : points2_.size();
  }
  /// d = 1: points in insertion order.
  const std::vector<double>& points_1d() const noexcept { return points1_; }
  /// d = 1: points in ascending order.
  const std::vector<double>& sorted_1d() const noexcept { return sorted1_; }
  const std::vector<Point2>& points_2d() const noexcept { return points2_; }

  /// Copy with one more point.
  PointSet with_point(std::span<const double> x) const {
    if (dimension_ == 1) {
      auto xs = points1_;
      xs.push_back(x[0]);
      return line(std::move(xs));
    }
    auto pts = points2_;
    pts.push_back({x[0], x[1]});
    return plane(std::move(pts));
  }

 private:
  PointSet() = default;
  int dimension_ = 1;
  std::vector<double> points1_;
  std::vector<double> sorted1_;
  std::vector<Point2> points2_;
};

/// Bucket grid for nearest-neighbor distance queries in the unit square.
class NearestNeighbor2d {
 public:
  explicit NearestNeighbor2d(const std::vector<Point2>& pts) : pts_(pts) {
    cells_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::sqrt(static_cast<double>(pts.size()))));
    buckets_.assign(cells_ * cells_, {});
    for (std::size_t i = 0; i < pts.size(); ++i)
      buckets_[cell(pts[i][1]) * cells_ + cell(pts[i][0])].push_back(i);
  }

  double distance(const Point2& q) const {
    const auto cx = static_cast<long>(cell(q[0]));
    const auto cy = static_cast<long>(cell(q[1]));
    const double h = 1.0 / static_cast<double>(cells_);
    double best2 = std::numeric_limits<double>::infinity();
    const long n = static_cast<long>(cells_);
    for (long ring = 0; ring <= n; ++ring) {
      // Points in ring r (Chebyshev cell distance) are at least (r - 1) h away.
      const double reach = static_cast<double>(ring - 1) * h;
      if (ring > 1 && reach * reach >= best2) break;
      for (long y = cy - ring; y <= cy + ring; ++y) {
        if (y < 0 || y >= n) continue;
        for (long x = cx - ring; x <= cx + ring; ++x) {
          if (x < 0 || x >= n) continue;
          if (std::max(std::abs(x - cx), std::abs(y - cy)) != ring) continue;
          for (std::size_t i : buckets_[static_cast<std::size_t>(y * n + x)]) {
            const double dx = pts_[i][0] - q[0];
            const double dy = pts_[i][1] - q[1];
            best2 = std::min(best2, dx * dx + dy * dy);
          }
        }
      }
    }
    return std::sqrt(best2);
  }

 private:
  std::size_t cell(double v) const {
    const auto c = static_cast<std::size_t>(v * static_cast<double>(cells_));
    return std::min(c, cells_ - 1);
  }

  const std::vector<Point2>& pts_;
  std::size_t cells_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

inline constexpr std::size_t kDefaultDistGrid = 512;

/// Half-lengths of the pieces of the 1-d sawtooth dist(., P): the two
/// boundary gaps count once with full length, interior gaps twice with half length.
struct SawtoothPieces {
  double left = 0.0;
  double right = 0.0;
  std::vector<double> half_gaps;
};

inline SawtoothPieces sawtooth_pieces(const PointSet& p) {
  const auto& xs = p.sorted_1d();
  SawtoothPieces s;
  s.left = xs.front();
  s.right = 1.0 - xs.back();
  s.half_gaps.reserve(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i) s.half_gaps.push_back(0.5 * (xs[i] - xs[i - 1]));
  return s;
}

/// sup_x dist(x, P). Exact for d = 1; for d = 2 the maximum over the nodes
/// of a grid x grid lattice including the boundary (a lower bound).
inline double covering_radius(const PointSet& p, std::size_t grid = kDefaultDistGrid) {
  if (p.size() == 0) throw DomainError("covering radius of an empty set");
  if (p.dimension() == 1) {
    const SawtoothPieces s = sawtooth_pieces(p);
    double h = std::max(s.left, s.right);
    for (double g : s.half_gaps) h = std::max(h, g);
    return h;
  }
  if (grid < 2) throw DomainError("grid must have at least two nodes per side");
  const NearestNeighbor2d nn(p.points_2d());
  double h = 0.0;
  const double step = 1.0 / static_cast<double>(grid - 1);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j)
      h = std::max(h, nn.distance({static_cast<double>(i) * step, static_cast<double>(j) * step}));
  return h;
}

/// (integral over [0,1]^d of dist(x,P)^gamma)^(1/gamma); gamma = inf gives the
/// covering radius. d = 1 integrates the sawtooth exactly; d = 2 uses the
/// midpoint rule on a grid x grid partition.
inline double dist_norm(const PointSet& p, double gamma, std::size_t grid = kDefaultDistGrid) {
  if (p.size() == 0) throw DomainError("distance norm of an empty set");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (std::isinf(gamma)) return covering_radius(p, grid);
  if (p.dimension() == 1) {
    const SawtoothPieces s = sawtooth_pieces(p);
    // Scale by the covering radius so that large gamma cannot underflow.
    double h = std::max(s.left, s.right);
    for (double g : s.half_gaps) h = std::max(h, g);
    if (h == 0.0) return 0.0;
    // integral_0^a t^gamma dt = a^(gamma+1)/(gamma+1) = h^(gamma+1) (a/h)^(gamma+1)/(gamma+1)
    auto piece = [&](double a) { return a * std::pow(a / h, gamma); };
    double sum = piece(s.left) + piece(s.right);
    for (double g : s.half_gaps) sum += 2.0 * piece(g);
    return h * std::pow(sum / (gamma + 1.0), 1.0 / gamma);
  }
  if (grid < 1) throw DomainError("grid must be positive");
  const NearestNeighbor2d nn(p.points_2d());
  const double step = 1.0 / static_cast<double>(grid);
  std::vector<double> d;
  d.reserve(grid * grid);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j)
      d.push_back(nn.distance({(static_cast<double>(i) + 0.5) * step,
                               (static_cast<double>(j) + 0.5) * step}));
  const double h = *std::max_element(d.begin(), d.end());
  if (h == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : d) sum += std::pow(v / h, gamma);
  return h * std::pow(sum / static_cast<double>(d.size()), 1.0 / gamma);
}

struct DistReport {
  double covering_radius = 0.0;
  /// gamma -> ||dist||_{L_gamma}; the gamma = inf entry equals covering_radius.
  std::map<double, double> l_gamma_norms;
  /// "exact-1d" or "grid-2d:<resolution>".
  std::string method;
};

inline DistReport dist_report(const PointSet& p, std::span<const double> gammas,
                              std::size_t grid = kDefaultDistGrid) {
  DistReport r;
  r.covering_radius = covering_radius(p, grid);
  r.method = p.dimension() == 1 ? "exact-1d" : "grid-2d:" + std::to_string(grid);
  for (double g : gammas) r.l_gamma_norms[g] = dist_norm(p, g, grid);
  r.l_gamma_norms[std::numeric_limits<double>::infinity()] = r.covering_radius;
  return r;
}

/// True when W^s_p embeds into the bounded continuous functions on a d-dimensional domain.
inline bool sobolev_embeds(double s, int d, double p) {
  if (p == 1.0) return s >= static_cast<double>(d);
  return s > static_cast<double>(d) / p;
}

/// Radius of information of P for B^s_p in L_q up to constants independent of P:
/// h^(s - d(1/p - 1/q)) if q >= p, else ||dist||_{L_gamma}^s with gamma = s / (1/q - 1/p).
inline double radius_proxy(const PointSet& p, double s, double p_int, double q_int,
                           std::size_t grid = kDefaultDistGrid) {
  if (!(p_int >= 1.0) || !(q_int >= 1.0)) throw DomainError("integrability exponents must be >= 1");
  const int d = p.dimension();
  if (!sobolev_embeds(s, d, p_int))
    throw DomainError("W^s_p does not embed into continuous functions");
  const double inv_p = std::isinf(p_int) ? 0.0 : 1.0 / p_int;
  const double inv_q = std::isinf(q_int) ? 0.0 : 1.0 / q_int;
  if (q_int >= p_int) {
    const double h = covering_radius(p, grid);
    return std::pow(h, s - static_cast<double>(d) * (inv_p - inv_q));
  }
  const double gamma = s / (inv_q - inv_p);
  return std::pow(dist_norm(p, gamma, grid), s);
}

/// Compact bump (1 - t^2)_+^2.
inline double bump_weight(double t) {
  const double u = 1.0 - t * t;
  return u > 0.0 ? u * u : 0.0;
}

/// Local fit produced for one query point.
struct MlsLocalFit {
  /// Polynomial coefficients in t = (y - x) / delta; the value at x is coefficients[0].
  Eigen::VectorXd coefficients;
  std::size_t first = 0;  ///< window is sorted indices [first, last)
  std::size_t last = 0;
  double delta = 0.0;
  /// max |f(y) - v(y)| over the window.
  double residual = 0.0;
};

/// One-dimensional moving least squares with two-sided nearest-neighbor windows.
///
/// For a query x the window holds the ceil(kappa (m+1)) points nearest to x,
/// delta is twice the distance to the farthest of them, and the local
/// polynomial of degree m minimizes sum_y Phi((x - y)/delta) |f(y) - v(y)|^2.
class MlsModel {
 public:
  MlsModel(const PointSet& points, std::span<const double> samples, std::size_t degree,
           double kappa)
      : degree_(degree), kappa_(kappa) {
    if (points.dimension() != 1) throw UnsupportedOperation("moving least squares is 1-d only");
    if (samples.size() != points.size()) throw DomainError("one sample per point required");
    if (!(kappa >= 1.0)) throw DomainError("window multiplier must be >= 1");
    window_ = static_cast<std::size_t>(std::ceil(kappa * static_cast<double>(degree + 1)));
    if (points.size() < window_) throw DomainError("not enough points for the MLS window");
    const auto& xs = points.points_1d();
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    x_.reserve(xs.size());
    f_.reserve(xs.size());
    for (std::size_t i : order) {
      x_.push_back(xs[i]);
      f_.push_back(samples[i]);
    }
  }

  std::size_t degree() const noexcept { return degree_; }
  double kappa() const noexcept { return kappa_; }
  std::size_t window_size() const noexcept { return window_; }

  MlsLocalFit local_fit(double x) const {
    // Grow [lo, hi) around the insertion point, taking the nearer side (left on ties).
    const auto it = std::lower_bound(x_.begin(), x_.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - x_.begin());
    std::size_t lo = hi;
    while (hi - lo < window_) {
      if (lo == 0) ++hi;
      else if (hi == x_.size()) --lo;
      else if (x - x_[lo - 1] <= x_[hi] - x) --lo;
      else ++hi;
    }
    MlsLocalFit fit;
    fit.first = lo;
    fit.last = hi;
    double far = 0.0;
    for (std::size_t i = lo; i < hi; ++i) far = std::max(far, std::abs(x_[i] - x));
    fit.delta = far > 0.0 ? 2.0 * far : 1.0;

    const auto rows = static_cast<Eigen::Index>(hi - lo);
    const auto cols = static_cast<Eigen::Index>(degree_ + 1);
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::size_t i = lo + static_cast<std::size_t>(r);
      const double t = (x_[i] - x) / fit.delta;
      const double sw = std::sqrt(bump_weight(t));
      double tp = 1.0;
      for (Eigen::Index c = 0; c < cols; ++c) {
        a(r, c) = sw * tp;
        tp *= t;
      }
      b[r] = sw * f_[i];
    }
    fit.coefficients = a.completeOrthogonalDecomposition().solve(b);
    for (std::size_t i = lo; i < hi; ++i) {
      const double t = (x_[i] - x) / fit.delta;
      double v = 0.0;
      for (Eigen::Index c = cols - 1; c >= 0; --c) v = v * t + fit.coefficients[c];
      fit.residual = std::max(fit.residual, std::abs(f_[i] - v));
    }
    return fit;
  }

  double operator()(double x) const { return local_fit(x).coefficients[0]; }

 private:
  std::size_t degree_;
  double kappa_;
  std::size_t window_ = 0;
  std::vector<double> x_;
  std::vector<double> f_;
};

inline constexpr double kDefaultWindowMultiplier = 2.0;

inline MlsModel mls_fit(const PointSet& points, std::span<const double> samples,
                        std::size_t degree, double kappa = kDefaultWindowMultiplier) {
  return MlsModel(points, samples, degree, kappa);
}

inline double mls_eval(const MlsModel& model, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("MLS evaluation point must lie in [0,1]");
  return model(x);
}

/// Node j of the uniform evaluation grid with `grid` nodes on [0,1].
inline double eval_grid_node(std::size_t j, std::size_t grid) {
  return static_cast<double>(j) / static_cast<double>(grid - 1);
}

/// Discrete L_q norm (mean over nodes; max for q = inf) of f_true - A_P f on
/// the uniform grid; `f_true` holds the exact values at the grid nodes.
inline double mls_error(std::span<const double> f_true, const MlsModel& model, double q) {
  const std::size_t grid = f_true.size();
  if (grid < 64) throw DomainError("MLS error grid must have at least 64 nodes");
  if (!(q >= 1.0)) throw DomainError("q must be >= 1");
  double acc = 0.0;
  for (std::size_t j = 0; j < grid; ++j) {
    const double e = std::abs(f_true[j] - model(eval_grid_node(j, grid)));
    if (std::isinf(q)) acc = std::max(acc, e);
    else acc += std::pow(e, q);
  }
  if (std::isinf(q)) return acc;
  return std::pow(acc / static_cast<double>(grid), 1.0 / q);
}

inline double mls_error(const std::function<double(double)>& f, const MlsModel& model, double q,
                        std::size_t grid) {
  if (grid < 64) throw DomainError("MLS error grid must have at least 64 nodes");
  std::vector<double> values(grid);
  for (std::size_t j = 0; j < grid; ++j) values[j] = f(eval_grid_node(j, grid));
  return mls_error(values, model, q);
}

}  // namespace randinfo
