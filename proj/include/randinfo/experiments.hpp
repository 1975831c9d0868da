#pragma once

// Seeded Monte Carlo harness. Each trial draws from its own RNG stream
// (master seed, stream id) and writes its result into a slot indexed by the
// trial number, so aggregates do not depend on thread count or completion order.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "randinfo/errors.hpp"
#include "randinfo/info_channels.hpp"
#include "randinfo/rng.hpp"
#include "randinfo/sobolev_geometry.hpp"
#include "randinfo/spectral_model.hpp"
#include "randinfo/wls_engine.hpp"

namespace randinfo {

// ---------------------------------------------------------------------------
// Execution

/// Worker count: `requested` if nonzero, else RANDINFO_THREADS, else the
/// hardware concurrency.
inline std::size_t thread_count(std::size_t requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RANDINFO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs fn(0..count-1) on up to `threads` workers; result i is fn(i).
/// The first exception (by index) is rethrown after all workers stop.
template <typename Fn>
auto parallel_map(std::size_t count, std::size_t threads, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(thread_count(threads), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Stream id of trial `trial` at grid position `group`.
constexpr std::uint64_t trial_stream(std::size_t group, std::size_t trial) noexcept {
  return (static_cast<std::uint64_t>(group) << 32) | static_cast<std::uint64_t>(trial);
}

// ---------------------------------------------------------------------------
// Statistics

/// Nearest-rank quantile of an unsorted sample.
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double rank = std::ceil(p * static_cast<double>(v.size()));
  const auto idx = static_cast<std::size_t>(std::max(1.0, rank)) - 1;
  return v[std::min(idx, v.size() - 1)];
}

struct Quantiles {
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
};

inline Quantiles quantiles(const std::vector<double>& v) {
  return {quantile(v, 0.05), quantile(v, 0.5), quantile(v, 0.95)};
}

/// Least squares line through (ln x, ln y).
struct RateFit {
  std::vector<double> xs;
  std::vector<double> ys;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

inline RateFit fit_loglog(std::vector<double> xs, std::vector<double> ys) {
  if (xs.size() != ys.size()) throw DomainError("fit_loglog: xs and ys differ in length");
  if (xs.size() < 3) throw DomainError("fit_loglog needs at least three points");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw DomainError("fit_loglog needs positive values");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    const double dy = std::log(ys[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DomainError("fit_loglog needs at least two distinct x values");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = std::log(ys[i]) - (f.intercept + f.slope * std::log(xs[i]));
    ss_res += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.xs = std::move(xs);
  f.ys = std::move(ys);
  return f;
}

// ---------------------------------------------------------------------------
// Configuration

enum class DensityKind { rho, uniform, plain };

inline std::string to_string(DensityKind d) {
  switch (d) {
    case DensityKind::rho: return "rho";
    case DensityKind::uniform: return "uniform";
    case DensityKind::plain: return "plain";
  }
  return "unknown";
}

/// How many functionals a trial draws for a given n.
struct OversamplingRule {
  enum class Kind { log_linear, linear, fixed };
  Kind kind = Kind::log_linear;
  double constant = 5.0;
  /// log_linear only: floor(C n ln n) instead of ceil(C n ln n).
  bool round_down = false;
  std::size_t count = 0;

  static OversamplingRule log_linear(double c, bool round_down = false) {
    return {Kind::log_linear, c, round_down, 0};
  }
  static OversamplingRule linear(double c) { return {Kind::linear, c, false, 0}; }
  static OversamplingRule fixed(std::size_t n) { return {Kind::fixed, 0.0, false, n}; }

  std::size_t samples(std::size_t n) const {
    switch (kind) {
      case Kind::fixed: return count;
      case Kind::linear:
        return static_cast<std::size_t>(std::ceil(constant * static_cast<double>(n) - 1e-9));
      case Kind::log_linear: {
        const double v = constant * static_cast<double>(n) * std::log(static_cast<double>(n));
        // Guard against products like 5 * 32 * ln 32 landing a hair above an integer.
        return static_cast<std::size_t>(round_down ? std::floor(v + 1e-9) : std::ceil(v - 1e-9));
      }
    }
    return 0;
  }
};

inline constexpr double kDefaultOversampling = 5.0;

/// Working dimension M = max(8N, 4n, 512).
inline std::size_t default_truncation(std::size_t n, std::size_t N) {
  return std::max({8 * N, 4 * n, std::size_t{512}});
}

struct TrialConfig {
  Channel channel = Channel::fourier;
  DensityKind density = DensityKind::rho;
  Spectrum spectrum = Spectrum::power_law(1.0);
  std::vector<std::size_t> n_grid{32};
  OversamplingRule oversampling = OversamplingRule::log_linear(kDefaultOversampling);
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  /// Working dimension; 0 selects default_truncation. Explicit spectra keep their own length.
  std::size_t truncation = 0;
  /// Replace the random draw by Fourier indices 1..n with unit weights.
  bool optimal_info = false;
  /// Pass criterion is wce <= bound_multiplier * theorem_bound.
  double bound_multiplier = 1.0;
  std::size_t threads = 0;
};

inline void validate(const TrialConfig& c) {
  if (c.trials < 1) throw DomainError("trials must be >= 1");
  if (c.n_grid.empty()) throw DomainError("n grid must be nonempty");
  for (std::size_t n : c.n_grid)
    if (n < 1) throw DomainError("n must be >= 1");
  if (c.optimal_info && c.channel != Channel::fourier)
    throw DomainError("optimal information is defined for the Fourier channel only");
  const bool ok = c.optimal_info || (c.channel == Channel::fourier && c.density == DensityKind::rho) ||
                  (c.channel == Channel::point && c.density != DensityKind::plain) ||
                  (c.channel == Channel::gauss && c.density != DensityKind::uniform);
  if (!ok)
    throw DomainError("unsupported channel/density combination: " + to_string(c.channel) + "/" +
                      to_string(c.density));
}

inline ModelSpace model_for(const TrialConfig& c, std::size_t n, std::size_t N) {
  Spectrum s = c.spectrum;
  if (s.kind() != SpectrumKind::explicit_values)
    s = s.truncated(c.truncation > 0 ? c.truncation : default_truncation(n, N));
  if (n > s.truncation()) throw DomainError("n exceeds the working dimension");
  return {s, c.channel == Channel::point ? BasisKind::trigonometric : BasisKind::coordinate};
}

inline InfoDraw draw_information(const TrialConfig& c, const ModelSpace& model, std::size_t n,
                                 std::size_t N, RngStream& rng) {
  if (c.optimal_info) {
    InfoDraw d = optimal_fourier_draw(n);
    d.seed = rng.master;
    d.stream = rng.stream;
    return d;
  }
  switch (c.channel) {
    case Channel::fourier: return sample_fourier(model.spectrum, n, N, rng);
    case Channel::point:
      return c.density == DensityKind::rho ? sample_points_rho(model, n, N, rng)
                                           : sample_points_uniform(N, rng);
    case Channel::gauss: return sample_gaussian(model, n, N, rng, c.density == DensityKind::rho);
  }
  throw DomainError("unknown channel");
}

/// Benchmark the channel is compared against: 5 (sigma_{n+1} + sqrt(tail/n))
/// for plain Gaussian information with N = 2n, sqrt(tail/n) otherwise.
inline double theorem_bound(const TrialConfig& c, std::size_t n) {
  const Spectrum& s = c.spectrum;
  if (c.channel == Channel::gauss && c.density == DensityKind::plain)
    return 5.0 * (s.sigma_or_zero(n + 1) + s.benchmark_bound(n));
  return s.benchmark_bound(n);
}

// ---------------------------------------------------------------------------
// Worst-case error trials

struct WceTrialRow {
  WceReport report;
  std::size_t trial = 0;
  bool within_theorem = false;
  /// wce <= 3 sigma_{n+1}.
  bool within_three_sigma = false;
  bool sandwich_ok = true;
};

struct WceGroup {
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t trials = 0;
  double theorem_bound = 0.0;
  double pass_fraction = 0.0;
  double three_sigma_fraction = 0.0;
  std::size_t failures = 0;
  std::size_t sandwich_violations = 0;
  Quantiles wce;
};

struct WceSummary {
  std::vector<WceTrialRow> rows;
  std::vector<WceGroup> groups;
};

inline WceSummary run_wce_trials(const TrialConfig& config) {
  validate(config);
  if (!config.spectrum.square_summable())
    throw DivergentSpectrum("refusing theorem comparison: spectrum tail is not square summable");

  WceSummary out;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const std::size_t n = config.n_grid[g];
    const std::size_t N = config.optimal_info ? n : config.oversampling.samples(n);
    const ModelSpace model = model_for(config, n, N);
    const double bound = theorem_bound(config, n);
    const double three_sigma = 3.0 * config.spectrum.sigma_or_zero(n + 1);

    auto rows = parallel_map(config.trials, config.threads, [&](std::size_t t) {
      RngStream rng(config.seed, trial_stream(g, t));
      const InfoDraw draw = draw_information(config, model, n, N, rng);
      WceTrialRow row;
      row.trial = t;
      row.report = evaluate_wce(draw, model, n, bound);
      const bool ok = row.report.pass;
      row.within_theorem = ok && row.report.wce_exact <= config.bound_multiplier * bound;
      row.within_three_sigma = ok && row.report.wce_exact <= three_sigma;
      row.sandwich_ok = sandwich_holds(row.report, model.spectrum);
      return row;
    });

    WceGroup grp;
    grp.n = n;
    grp.N = N;
    grp.M = model.dimension();
    grp.trials = config.trials;
    grp.theorem_bound = bound;
    std::vector<double> wces;
    std::size_t within = 0;
    std::size_t within3 = 0;
    for (const auto& r : rows) {
      wces.push_back(r.report.wce_exact);
      within += r.within_theorem;
      within3 += r.within_three_sigma;
      grp.failures += !r.report.pass;
      grp.sandwich_violations += !r.sandwich_ok;
    }
    grp.pass_fraction = static_cast<double>(within) / static_cast<double>(rows.size());
    grp.three_sigma_fraction = static_cast<double>(within3) / static_cast<double>(rows.size());
    grp.wce = quantiles(wces);
    out.groups.push_back(grp);
    for (auto& r : rows) out.rows.push_back(std::move(r));
  }
  return out;
}

/// Plain Gaussian information with N = 2n (weights 1/N, equivalently 1).
inline WceSummary run_gaussian_theorem(const Spectrum& spectrum, std::size_t n, std::size_t trials,
                                       std::uint64_t seed, std::size_t threads = 0) {
  TrialConfig c;
  c.channel = Channel::gauss;
  c.density = DensityKind::plain;
  c.spectrum = spectrum;
  c.n_grid = {n};
  c.oversampling = OversamplingRule::linear(2.0);
  c.trials = trials;
  c.seed = seed;
  c.threads = threads;
  return run_wce_trials(c);
}

// ---------------------------------------------------------------------------
// Coupon collector lower bound for random Fourier coefficients

struct FourierRadius {
  /// sigma at the smallest unobserved index.
  double radius = 0.0;
  std::size_t min_missing = 1;
  /// Every index 1..M was observed; radius is the sigma_{M+1} proxy.
  bool truncated = false;
  /// min_missing > n_ref.
  bool covers_head = false;
};

/// Radius of Fourier information: the optimal algorithm zero-fills the
/// unobserved coordinates, so +-sigma_i b_i at the first missing i is the worst case.
inline FourierRadius fourier_radius(std::span<const std::size_t> observed, const Spectrum& spectrum,
                                    std::size_t n_ref) {
  const std::size_t M = spectrum.truncation();
  std::vector<char> seen(M + 2, 0);
  for (std::size_t k : observed) {
    if (k < 1 || k > M) throw OutOfRange("observed index outside 1..M");
    seen[k] = 1;
  }
  FourierRadius r;
  std::size_t i = 1;
  while (i <= M && seen[i]) ++i;
  r.min_missing = i;
  r.truncated = i > M;
  r.radius = spectrum.sigma_or_zero(i);
  r.covers_head = i > n_ref;
  return r;
}

struct CouponReport {
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t trials = 0;
  /// P[min missing index > n], i.e. all of 1..n observed.
  double coverage_probability = 0.0;
  double p_radius_ge_sigma_n = 0.0;
  double p_radius_le_sigma_n1 = 0.0;
  Quantiles radius;
  std::vector<double> radii;
  std::vector<std::size_t> min_missing;
};

inline CouponReport run_coupon(const Spectrum& spectrum, std::size_t n, std::size_t N,
                               std::size_t trials, std::uint64_t seed, std::size_t threads = 0,
                               std::size_t truncation = 0) {
  if (trials < 1) throw DomainError("trials must be >= 1");
  if (!spectrum.square_summable())
    throw DivergentSpectrum("refusing coupon experiment: spectrum tail is not square summable");
  Spectrum s = spectrum;
  if (s.kind() != SpectrumKind::explicit_values)
    s = s.truncated(truncation > 0 ? truncation : default_truncation(n, N));
  const double sigma_n = s.sigma(n);
  const double sigma_n1 = s.sigma_or_zero(n + 1);

  auto results = parallel_map(trials, threads, [&](std::size_t t) {
    RngStream rng(seed, trial_stream(0, t));
    const InfoDraw d = sample_fourier(s, n, N, rng);
    std::vector<std::size_t> idx;
    idx.reserve(d.size());
    for (const auto& f : d.functionals) idx.push_back(std::get<FourierIndex>(f).k);
    return fourier_radius(idx, s, n);
  });

  CouponReport r;
  r.n = n;
  r.N = N;
  r.M = s.truncation();
  r.trials = trials;
  std::size_t covered = 0;
  std::size_t ge = 0;
  std::size_t le = 0;
  for (const auto& fr : results) {
    r.radii.push_back(fr.radius);
    r.min_missing.push_back(fr.min_missing);
    covered += fr.covers_head;
    ge += fr.radius >= sigma_n;
    le += fr.radius <= sigma_n1;
  }
  const auto T = static_cast<double>(trials);
  r.coverage_probability = static_cast<double>(covered) / T;
  r.p_radius_ge_sigma_n = static_cast<double>(ge) / T;
  r.p_radius_le_sigma_n1 = static_cast<double>(le) / T;
  r.radius = quantiles(r.radii);
  return r;
}

// ---------------------------------------------------------------------------
// Matrix concentration

struct ConcentrationRow {
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t trial = 0;
  double statistic = 0.0;
};

struct ConcentrationGroup {
  std::size_t n = 0;
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t trials = 0;
  /// Fraction of trials with statistic <= 1/2.
  double fraction_within = 0.0;
  Quantiles statistic;
};

struct ConcentrationSummary {
  std::vector<ConcentrationRow> rows;
  std::vector<ConcentrationGroup> groups;
};

inline ConcentrationSummary run_concentration(const TrialConfig& config) {
  validate(config);
  if (config.optimal_info || config.density != DensityKind::rho)
    throw DomainError("concentration statistic needs a rho_n-weighted draw");
  if (!config.spectrum.square_summable())
    throw DivergentSpectrum("refusing concentration experiment: divergent spectrum");
  ConcentrationSummary out;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const std::size_t n = config.n_grid[g];
    const std::size_t N = config.oversampling.samples(n);
    const ModelSpace model = model_for(config, n, N);
    auto stats = parallel_map(config.trials, config.threads, [&](std::size_t t) {
      RngStream rng(config.seed, trial_stream(g, t));
      const InfoDraw draw = draw_information(config, model, n, N, rng);
      return concentration_stat(draw, model, n);
    });
    ConcentrationGroup grp;
    grp.n = n;
    grp.N = N;
    grp.M = model.dimension();
    grp.trials = config.trials;
    std::size_t within = 0;
    for (std::size_t t = 0; t < stats.size(); ++t) {
      within += stats[t] <= 0.5;
      out.rows.push_back({n, N, t, stats[t]});
    }
    grp.fraction_within = static_cast<double>(within) / static_cast<double>(stats.size());
    grp.statistic = quantiles(stats);
    out.groups.push_back(grp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geometry of iid uniform points

inline PointSet uniform_point_set(int d, std::size_t n, RngStream& rng) {
  if (d == 1) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.uniform();
    return PointSet::line(std::move(xs));
  }
  std::vector<Point2> pts(n);
  for (auto& p : pts) {
    p[0] = rng.uniform();
    p[1] = rng.uniform();
  }
  return PointSet::plane(std::move(pts));
}

struct SobolevRateRow {
  std::size_t n = 0;
  double mean_covering_radius = 0.0;
  std::map<double, double> mean_dist_norm;
  /// h n^{1/d} / (ln n)^{1/d}.
  double covering_ratio = 0.0;
};

struct SobolevRates {
  int d = 1;
  std::size_t trials = 0;
  std::string method;
  std::vector<SobolevRateRow> rows;
  RateFit covering_fit;
  std::map<double, RateFit> dist_fits;
  /// max / min of covering_ratio over the grid.
  double ratio_spread = 1.0;
};

inline SobolevRates run_sobolev_rates(int d, const std::vector<double>& gammas,
                                      const std::vector<std::size_t>& n_grid, std::size_t trials,
                                      std::uint64_t seed, std::size_t grid = kDefaultDistGrid,
                                      std::size_t threads = 0) {
  if (d != 1 && d != 2) throw DomainError("dimension must be 1 or 2");
  if (n_grid.size() < 3) throw DomainError("n grid needs at least three sizes for a rate fit");
  if (trials < 1) throw DomainError("trials must be >= 1");
  SobolevRates out;
  out.d = d;
  out.trials = trials;
  out.method = d == 1 ? "exact-1d" : "grid-2d:" + std::to_string(grid);
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    const std::size_t n = n_grid[g];
    auto per_trial = parallel_map(trials, threads, [&](std::size_t t) {
      RngStream rng(seed, trial_stream(g, t));
      const PointSet p = uniform_point_set(d, n, rng);
      std::vector<double> v;
      v.push_back(covering_radius(p, grid));
      for (double gm : gammas) v.push_back(dist_norm(p, gm, grid));
      return v;
    });
    SobolevRateRow row;
    row.n = n;
    for (const auto& v : per_trial) row.mean_covering_radius += v[0];
    row.mean_covering_radius /= static_cast<double>(trials);
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      double s = 0.0;
      for (const auto& v : per_trial) s += v[j + 1];
      row.mean_dist_norm[gammas[j]] = s / static_cast<double>(trials);
    }
    const double nd = static_cast<double>(n);
    const double inv_d = 1.0 / static_cast<double>(d);
    row.covering_ratio =
        row.mean_covering_radius * std::pow(nd, inv_d) / std::pow(std::log(nd), inv_d);
    out.rows.push_back(row);
  }
  std::vector<double> xs;
  std::vector<double> hs;
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  for (const auto& r : out.rows) {
    xs.push_back(static_cast<double>(r.n));
    hs.push_back(r.mean_covering_radius);
    rmin = std::min(rmin, r.covering_ratio);
    rmax = std::max(rmax, r.covering_ratio);
  }
  out.covering_fit = fit_loglog(xs, hs);
  out.ratio_spread = rmax / rmin;
  for (double gm : gammas) {
    std::vector<double> ys;
    for (const auto& r : out.rows) ys.push_back(r.mean_dist_norm.at(gm));
    out.dist_fits[gm] = fit_loglog(xs, ys);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moving least squares rates

enum class TestFunction { sine, polynomial };

inline std::string to_string(TestFunction f) {
  return f == TestFunction::sine ? "sin2pi" : "monomial";
}

/// sin(2 pi x), or x^m for the reproduced polynomial.
inline std::function<double(double)> test_function(TestFunction f, std::size_t m) {
  if (f == TestFunction::sine) return [](double x) { return std::sin(2.0 * std::numbers::pi * x); };
  return [m](double x) { return std::pow(x, static_cast<double>(m)); };
}

inline constexpr double kNoiseFloor = 1e-10;
inline constexpr std::size_t kDefaultMlsGrid = 2048;

struct MlsRateSeries {
  TestFunction function = TestFunction::sine;
  std::vector<std::size_t> n;
  std::vector<double> mean_error;
  /// Absent when every error sits at the floating-point noise floor.
  std::optional<RateFit> fit;
};

struct MlsRates {
  std::size_t s = 1;
  std::size_t m = 1;
  double q = 1.0;
  double kappa = kDefaultWindowMultiplier;
  std::size_t trials = 0;
  std::size_t grid = kDefaultMlsGrid;
  std::vector<MlsRateSeries> series;
};

/// MLS with degree m = s on iid uniform points; error in the discrete L_q norm.
inline MlsRates run_mls_rates(std::size_t s, double q, const std::vector<TestFunction>& functions,
                              const std::vector<std::size_t>& n_grid, std::size_t trials,
                              std::uint64_t seed, std::size_t grid = kDefaultMlsGrid,
                              double kappa = kDefaultWindowMultiplier, std::size_t threads = 0) {
  if (s < 1) throw DomainError("smoothness must be >= 1");
  if (trials < 1) throw DomainError("trials must be >= 1");
  MlsRates out;
  out.s = s;
  out.m = s;
  out.q = q;
  out.kappa = kappa;
  out.trials = trials;
  out.grid = grid;
  for (std::size_t fi = 0; fi < functions.size(); ++fi) {
    const auto f = test_function(functions[fi], out.m);
    std::vector<double> truth(grid);
    for (std::size_t j = 0; j < grid; ++j) truth[j] = f(eval_grid_node(j, grid));
    MlsRateSeries series;
    series.function = functions[fi];
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
      const std::size_t n = n_grid[g];
      auto errs = parallel_map(trials, threads, [&](std::size_t t) {
        // Same point sets for every test function.
        RngStream rng(seed, trial_stream(g, t));
        const PointSet p = uniform_point_set(1, n, rng);
        std::vector<double> vals;
        vals.reserve(n);
        for (double x : p.points_1d()) vals.push_back(f(x));
        const MlsModel model = mls_fit(p, vals, out.m, kappa);
        return mls_error(truth, model, q);
      });
      double mean = 0.0;
      for (double e : errs) mean += e;
      series.n.push_back(n);
      series.mean_error.push_back(mean / static_cast<double>(trials));
    }
    const double worst = *std::max_element(series.mean_error.begin(), series.mean_error.end());
    if (worst > kNoiseFloor && n_grid.size() >= 3) {
      std::vector<double> xs(series.n.begin(), series.n.end());
      series.fit = fit_loglog(xs, series.mean_error);
    }
    out.series.push_back(std::move(series));
  }
  return out;
}

}  // namespace randinfo
