#pragma once

// The end-to-end acceptance suite. Every criterion is evaluated at its fixed
// tolerance; a criterion that does not hold is reported as FAIL, never retuned.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "randinfo/experiments.hpp"
#include "randinfo/io.hpp"
#include "randinfo/rng.hpp"
#include "randinfo/sobolev_geometry.hpp"
#include "randinfo/spectral_model.hpp"
#include "randinfo/wls_engine.hpp"

namespace randinfo {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

struct Artifact {
  std::string name;  ///< file stem, e.g. "c03_wce_rows"
  std::string csv;
};

struct AcceptanceOptions {
  std::uint64_t seed = 7;
  std::size_t threads = 0;
  /// Run the suite a second time and compare every CSV byte for byte.
  bool determinism_check = true;
  std::function<void(const CriterionResult&)> on_result;
};

struct AcceptanceRun {
  std::vector<CriterionResult> results;
  std::vector<Artifact> artifacts;
  Json digest = Json::object();

  bool all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  }
};

namespace detail {

inline std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

inline std::uint64_t criterion_seed(std::uint64_t master, int id) {
  return stream_seed(master, 0xACCE00ULL + static_cast<std::uint64_t>(id));
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
  return std::abs(a - b) / scale;
}

/// Accumulates the sandwich check over every wce row produced by the suite.
struct SandwichLedger {
  std::size_t checked = 0;
  std::size_t violations = 0;

  void add(const WceSummary& s) {
    for (const auto& r : s.rows) {
      if (!r.report.pass) continue;
      ++checked;
      violations += !r.sandwich_ok;
    }
  }
  void add(const WceReport& r, const Spectrum& spectrum) {
    if (!r.pass) return;
    ++checked;
    violations += !sandwich_holds(r, spectrum);
  }
};

class Suite {
 public:
  explicit Suite(const AcceptanceOptions& o) : opt_(o) {}

  AcceptanceRun run() {
    optimal_information();
    general_theorem();
    gaussian_theorem();
    concentration();
    coupon();
    sobolev_rates();
    geometry_units();
    mls();
    engine_invariances();
    sandwich();  // last: aggregates every wce row above
    std::sort(out_.results.begin(), out_.results.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return std::move(out_);
  }

 private:
  void report(int id, std::string title, bool pass, std::string detail) {
    CriterionResult r{id, std::move(title), pass, std::move(detail)};
    if (opt_.on_result) opt_.on_result(r);
    out_.results.push_back(std::move(r));
  }

  void artifact(std::string name, std::string csv) {
    out_.artifacts.push_back({std::move(name), std::move(csv)});
  }

  // 1. Fourier indices 1..n with unit weights recover P_n exactly.
  void optimal_information() {
    const Spectrum s = Spectrum::power_law(1.0, 512);
    std::string csv(kWceCsvHeader);
    csv += '\n';
    double worst = 0.0;
    bool ok = true;
    for (std::size_t n : {4, 16, 64}) {
      TrialConfig c;
      c.channel = Channel::fourier;
      c.optimal_info = true;
      c.spectrum = s;
      c.n_grid = {n};
      c.trials = 1;
      c.truncation = 512;
      c.seed = criterion_seed(opt_.seed, 1);
      c.threads = opt_.threads;
      const WceSummary sum = run_wce_trials(c);
      sandwich_.add(sum);
      const WceReport& r = sum.rows.front().report;
      const double rel = rel_diff(r.wce_exact, s.sigma(n + 1));
      worst = std::max(worst, rel);
      ok = ok && r.pass && rel <= 1e-10;
      csv += to_csv_row(r) + '\n';
    }
    artifact("c01_optimal_information", csv);
    report(1, "optimal information: wce = sigma_{n+1}, n in {4,16,64}", ok,
           "max relative deviation " + fmt(worst, 3) + " (tol 1e-10)");
  }

  // 3. High-probability bound for rho_n-weighted Fourier and point information.
  void general_theorem() {
    const Spectrum s = Spectrum::power_law(1.0);
    bool ok_bench = true;
    bool ok_three = true;
    std::string detail;
    std::string rows_csv(kWceCsvHeader);
    rows_csv += '\n';
    std::string groups_csv = "channel," + std::string(kWceGroupCsvHeader) + '\n';
    for (Channel ch : {Channel::fourier, Channel::point}) {
      TrialConfig c;
      c.channel = ch;
      c.density = DensityKind::rho;
      c.spectrum = s;
      c.n_grid = {16, 32};
      c.oversampling = OversamplingRule::log_linear(kDefaultOversampling);
      c.trials = 100;
      c.seed = criterion_seed(opt_.seed, 3);
      c.threads = opt_.threads;
      const WceSummary sum = run_wce_trials(c);
      sandwich_.add(sum);
      for (const auto& r : sum.rows) rows_csv += to_csv_row(r.report) + '\n';
      const std::string g = wce_groups_csv(sum);
      for (std::size_t pos = g.find('\n') + 1; pos < g.size();) {
        const auto end = g.find('\n', pos);
        groups_csv += to_string(ch) + ',' + g.substr(pos, end - pos + 1);
        pos = end + 1;
      }
      for (const auto& grp : sum.groups) {
        const auto within = static_cast<std::size_t>(std::lround(grp.pass_fraction * 100.0));
        const auto within3 = static_cast<std::size_t>(std::lround(grp.three_sigma_fraction * 100.0));
        ok_bench = ok_bench && within >= 95;
        ok_three = ok_three && within3 >= 95;
        detail += to_string(ch) + " n=" + std::to_string(grp.n) + " N=" + std::to_string(grp.N) +
                  ": bench " + std::to_string(within) + "/100, 3sigma " +
                  std::to_string(within3) + "/100; ";
      }
    }
    artifact("c03_wce_rows", rows_csv);
    artifact("c03_wce_groups", groups_csv);
    detail.resize(detail.size() - 2);
    report(3, "rho_n-weighted least squares: wce <= sqrt(tail/n) and <= 3 sigma_{n+1} in >= 95/100",
           ok_bench && ok_three, detail);
  }

  // 4. Plain Gaussian information with N = 2n.
  void gaussian_theorem() {
    const Spectrum s = Spectrum::power_law(1.0);
    bool ok = true;
    std::string detail;
    std::string rows_csv(kWceCsvHeader);
    rows_csv += '\n';
    for (std::size_t n : {16, 32, 64}) {
      const WceSummary sum =
          run_gaussian_theorem(s, n, 100, criterion_seed(opt_.seed, 4) + n, opt_.threads);
      sandwich_.add(sum);
      for (const auto& r : sum.rows) rows_csv += to_csv_row(r.report) + '\n';
      const auto within = static_cast<std::size_t>(std::lround(sum.groups[0].pass_fraction * 100.0));
      ok = ok && within >= 95;
      detail += "n=" + std::to_string(n) + ": " + std::to_string(within) + "/100; ";
    }
    artifact("c04_gaussian_rows", rows_csv);
    detail.resize(detail.size() - 2);
    report(4, "plain Gaussian N=2n: wce <= 5(sigma_{n+1} + sqrt(tail/n)) in >= 95/100", ok, detail);
  }

  // 5. Concentration of the empirical Gram matrix.
  void concentration() {
    TrialConfig c;
    c.channel = Channel::fourier;
    c.density = DensityKind::rho;
    c.spectrum = Spectrum::power_law(1.0);
    c.n_grid = {32};
    c.trials = 100;
    c.seed = criterion_seed(opt_.seed, 5);
    c.threads = opt_.threads;
    const ConcentrationSummary sum = run_concentration(c);
    artifact("c05_concentration", concentration_csv(sum));
    const auto& g = sum.groups.front();
    const auto within = static_cast<std::size_t>(std::lround(g.fraction_within * 100.0));
    report(5, "concentration statistic <= 1/2 in >= 95/100 (Fourier, n=32, N=555)", within >= 95,
           std::to_string(within) + "/100 within; median " + fmt(g.statistic.q50) + ", q95 " +
               fmt(g.statistic.q95));
  }

  // 6. Coupon-collector regime split for Fourier information.
  void coupon() {
    const Spectrum s = Spectrum::power_law(1.0);
    const std::size_t n = 64;
    const std::size_t n_low = OversamplingRule::log_linear(0.5, true).samples(n);
    const std::size_t n_high = OversamplingRule::log_linear(kDefaultOversampling).samples(n);
    const std::uint64_t seed = criterion_seed(opt_.seed, 6);
    const CouponReport low = run_coupon(s, n, n_low, 200, seed, opt_.threads);
    const CouponReport high = run_coupon(s, n, n_high, 200, seed + 1, opt_.threads);
    artifact("c06_coupon", coupon_csv(low) + coupon_csv(high).substr(coupon_csv(high).find('\n') + 1));
    const bool ok = low.p_radius_ge_sigma_n >= 0.9 && high.p_radius_le_sigma_n1 >= 0.95;
    report(6, "coupon split: P[radius >= sigma_n] >= 0.9 at N=133, P[radius <= sigma_{n+1}] >= 0.95 at N=1331",
           ok,
           "N=" + std::to_string(n_low) + ": " + fmt(low.p_radius_ge_sigma_n) + "; N=" +
               std::to_string(n_high) + ": " + fmt(high.p_radius_le_sigma_n1));
  }

  // 7. Hole sizes of iid uniform points on [0,1].
  void sobolev_rates() {
    std::vector<std::size_t> grid;
    for (int e = 6; e <= 12; ++e) grid.push_back(std::size_t{1} << e);
    const SobolevRates r = run_sobolev_rates(1, {1.0}, grid, 200, criterion_seed(opt_.seed, 7),
                                             kDefaultDistGrid, opt_.threads);
    artifact("c07_sobolev_rates", sobolev_csv(r));
    const double slope = r.dist_fits.at(1.0).slope;
    const bool ok = slope >= -1.1 && slope <= -0.9 && r.ratio_spread <= 2.0;
    report(7, "d=1: slope of mean ||dist||_L1 in [-1.1,-0.9]; h n / ln n within factor 2", ok,
           "slope " + fmt(slope) + ", ratio spread " + fmt(r.ratio_spread));
  }

  // 8. Closed-form geometry values.
  void geometry_units() {
    const double h = covering_radius(PointSet::line({0.5}));
    const double l1 = dist_norm(PointSet::line({0.25, 0.75}), 1.0);
    const bool ok = std::abs(h - 0.5) <= 1e-12 && std::abs(l1 - 0.125) <= 1e-12;
    report(8, "covering_radius({0.5}) = 0.5, ||dist({0.25,0.75})||_L1 = 0.125", ok,
           "h=" + format_number(h) + ", L1=" + format_number(l1));
  }

  // 9. Moving least squares: reproduction and rates.
  void mls() {
    const std::uint64_t seed = criterion_seed(opt_.seed, 9);
    double worst = 0.0;
    for (std::size_t m : {1, 2}) {
      for (std::size_t t = 0; t < 50; ++t) {
        RngStream rng(seed, trial_stream(m, t));
        const auto n = 8 + static_cast<std::size_t>(rng.uniform() * 57.0);
        const PointSet p = uniform_point_set(1, n, rng);
        std::vector<double> coef(m + 1);
        for (auto& a : coef) a = rng.normal();
        auto poly = [&](double x) {
          double v = 0.0;
          for (std::size_t k = coef.size(); k-- > 0;) v = v * x + coef[k];
          return v;
        };
        std::vector<double> vals;
        for (double x : p.points_1d()) vals.push_back(poly(x));
        const MlsModel model = mls_fit(p, vals, m);
        double scale = 1.0;
        double err = 0.0;
        for (std::size_t j = 0; j < 257; ++j) {
          const double x = eval_grid_node(j, 257);
          scale = std::max(scale, std::abs(poly(x)));
          err = std::max(err, std::abs(poly(x) - model(x)));
        }
        worst = std::max(worst, err / scale);
      }
    }
    const bool reproduce_ok = worst <= 1e-8;

    std::vector<std::size_t> grid;
    for (int e = 6; e <= 11; ++e) grid.push_back(std::size_t{1} << e);
    const MlsRates sup = run_mls_rates(2, std::numeric_limits<double>::infinity(),
                                       {TestFunction::sine}, grid, 100, seed + 1, kDefaultMlsGrid,
                                       kDefaultWindowMultiplier, opt_.threads);
    const MlsRates l1 = run_mls_rates(1, 1.0, {TestFunction::sine}, grid, 100, seed + 2,
                                      kDefaultMlsGrid, kDefaultWindowMultiplier, opt_.threads);
    artifact("c09_mls_rates", mls_csv(sup) + mls_csv(l1).substr(mls_csv(l1).find('\n') + 1));
    const double slope_sup = sup.series.front().fit ? sup.series.front().fit->slope : 0.0;
    const double slope_l1 = l1.series.front().fit ? l1.series.front().fit->slope : 0.0;
    const bool ok = reproduce_ok && slope_sup >= -2.3 && slope_sup <= -1.5 && slope_l1 >= -1.2 &&
                    slope_l1 <= -0.8;
    report(9, "MLS: polynomial reproduction 1e-8; sin slopes s=2,q=inf in [-2.3,-1.5], s=1,q=1 in [-1.2,-0.8]",
           ok,
           "reproduction rel err " + fmt(worst, 3) + "; slope(s=2,q=inf) " + fmt(slope_sup) +
               "; slope(s=1,q=1) " + fmt(slope_l1));
  }

  // 10. Weight homogeneity and permutation invariance of the estimator.
  void engine_invariances() {
    const std::uint64_t seed = criterion_seed(opt_.seed, 10);
    double worst_h = 0.0;
    double worst_p = 0.0;
    std::size_t rank_deficient = 0;
    std::string csv = "config,channel,n,N,M,pass,lambda,homogeneity_dev,permutation_dev\n";
    for (std::size_t cfg = 0; cfg < 50; ++cfg) {
      RngStream rng(seed, cfg);
      const Channel ch = cfg % 3 == 0 ? Channel::fourier : cfg % 3 == 1 ? Channel::point : Channel::gauss;
      const double alpha = 0.75 + 1.25 * rng.uniform();
      const auto n = 2 + static_cast<std::size_t>(rng.uniform() * 11.0);
      const std::size_t N = OversamplingRule::log_linear(kDefaultOversampling).samples(n);
      const std::size_t M = 64;
      const ModelSpace model{Spectrum::power_law(alpha, M),
                             ch == Channel::point ? BasisKind::trigonometric : BasisKind::coordinate};
      InfoDraw d = ch == Channel::fourier ? sample_fourier(model.spectrum, n, N, rng)
                   : ch == Channel::point ? sample_points_rho(model, n, N, rng)
                                          : sample_gaussian(model, n, N, rng, true);
      CoefVector c = CoefVector::zero(M);
      for (Eigen::Index k = 0; k < c.c.size(); ++k)
        c.c[k] = rng.normal() * model.spectrum.sigma(static_cast<std::size_t>(k) + 1);
      const double lambda = std::exp(std::log(10.0) * (2.0 * rng.uniform() - 1.0));

      const InfoMatrices base = assemble(d, model, n);
      const SpectralCheck bc = spectral_check(base);
      const WceReport br = evaluate_wce(d, model, n, 0.0);
      sandwich_.add(br, model.spectrum);

      InfoDraw scaled = d;
      for (auto& w : scaled.weights) w *= lambda;
      const InfoMatrices sm = assemble(scaled, model, n);
      const SpectralCheck sc = spectral_check(sm);
      const WceReport sr = evaluate_wce(scaled, model, n, 0.0);
      const double root = std::sqrt(lambda);
      double dev_h = std::max(rel_diff(sc.beta_hat, root * bc.beta_hat),
                              rel_diff(sr.wce_exact, br.wce_exact));
      if (sc.pass != bc.pass) dev_h = std::numeric_limits<double>::infinity();
      if (bc.pass) {
        // On a rank-deficient draw alpha_hat is rounding noise and solve is undefined.
        const CoefVector bs = solve(base, measure(d, model, c));
        const CoefVector ss = solve(sm, measure(scaled, model, c));
        dev_h = std::max({dev_h, rel_diff(sc.alpha_hat, root * bc.alpha_hat),
                          (ss.c - bs.c).norm() / std::max(bs.c.norm(), 1e-300)});
      } else {
        ++rank_deficient;
      }

      InfoDraw perm = d;
      std::vector<std::size_t> order(d.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng.engine);
      for (std::size_t i = 0; i < order.size(); ++i) {
        perm.functionals[i] = d.functionals[order[i]];
        perm.weights[i] = d.weights[order[i]];
      }
      const WceReport pr = evaluate_wce(perm, model, n, 0.0);
      const double dev_p = std::max({rel_diff(pr.alpha_hat, br.alpha_hat),
                                     rel_diff(pr.beta_hat, br.beta_hat),
                                     rel_diff(pr.wce_exact, br.wce_exact)});
      worst_h = std::max(worst_h, dev_h);
      worst_p = std::max(worst_p, dev_p);
      csv += std::to_string(cfg) + ',' + to_string(ch) + ',' + std::to_string(n) + ',' +
             std::to_string(N) + ',' + std::to_string(M) + ',' + (bc.pass ? "true" : "false") + ',' +
             format_number(lambda) + ',' +
             format_number(dev_h) + ',' + format_number(dev_p) + '\n';
    }
    artifact("c10_engine_invariances", csv);
    report(10, "homogeneity (1e-10) and permutation invariance (1e-12) on 50 configurations",
           worst_h <= 1e-10 && worst_p <= 1e-12,
           "max homogeneity dev " + fmt(worst_h, 3) + ", max permutation dev " + fmt(worst_p, 3) +
               " (" + std::to_string(rank_deficient) + " rank-deficient draws checked on beta_hat and wce only)");
  }

  // 2. Reported after all wce experiments have run.
  void sandwich() {
    report(2, "sandwich bound on every pass=true wce row of the suite", sandwich_.violations == 0,
           std::to_string(sandwich_.violations) + " violations in " +
               std::to_string(sandwich_.checked) + " rows");
  }

  AcceptanceOptions opt_;
  AcceptanceRun out_;
  SandwichLedger sandwich_;
};

}  // namespace detail

/// All criteria, optionally followed by the determinism rerun (criterion 11).
inline AcceptanceRun run_acceptance(const AcceptanceOptions& options) {
  AcceptanceRun run = detail::Suite(options).run();
  if (options.determinism_check) {
    AcceptanceOptions quiet = options;
    quiet.on_result = nullptr;
    const AcceptanceRun again = detail::Suite(quiet).run();
    std::size_t mismatched = 0;
    const bool same_count = again.artifacts.size() == run.artifacts.size();
    for (std::size_t i = 0; same_count && i < run.artifacts.size(); ++i)
      mismatched += run.artifacts[i].name != again.artifacts[i].name ||
                    run.artifacts[i].csv != again.artifacts[i].csv;
    CriterionResult r{11, "determinism: two runs with one master seed give byte-identical CSV",
                      same_count && mismatched == 0,
                      std::to_string(run.artifacts.size()) + " CSV artifacts compared, " +
                          std::to_string(mismatched) + " differ"};
    if (options.on_result) options.on_result(r);
    run.results.push_back(std::move(r));
  }
  Json results = Json::array();
  for (const auto& r : run.results)
    results.push_back(Json{{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
  run.digest = Json{{"seed", options.seed}, {"criteria", results}};
  return run;
}

inline std::string acceptance_csv(const AcceptanceRun& run) {
  std::string out = "id,pass,title,detail\n";
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + '"';
  };
  for (const auto& r : run.results)
    out += std::to_string(r.id) + ',' + (r.pass ? "true" : "false") + ',' + quote(r.title) + ',' +
           quote(r.detail) + '\n';
  return out;
}

}  // namespace randinfo
