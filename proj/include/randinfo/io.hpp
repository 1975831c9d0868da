#pragma once

// JSON and CSV serialization. Numbers are written in shortest round-trip
// form, so a CSV cell parses back to the identical double.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "randinfo/errors.hpp"
#include "randinfo/experiments.hpp"
#include "randinfo/info_channels.hpp"
#include "randinfo/sobolev_geometry.hpp"
#include "randinfo/spectral_model.hpp"
#include "randinfo/wls_engine.hpp"

namespace randinfo {

using Json = nlohmann::ordered_json;

/// Shortest decimal form that parses back to `v`; "inf", "-inf", "nan" otherwise.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline double parse_number(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DomainError("not a number: '" + std::string(s) + "'");
  return v;
}

/// JSON has no infinities; non-finite values become their string spelling.
inline Json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline double number_from_json(const Json& j) {
  if (j.is_string()) return parse_number(j.get<std::string>());
  return j.get<double>();
}

// ---------------------------------------------------------------------------
// Spectrum

inline Json to_json(const Spectrum& s) {
  Json j;
  j["kind"] = to_string(s.kind());
  j["alpha"] = s.alpha();
  j["beta"] = s.beta();
  j["q"] = s.q();
  j["values"] = s.kind() == SpectrumKind::explicit_values ? s.values() : std::vector<double>{};
  j["M"] = s.truncation();
  return j;
}

inline Spectrum spectrum_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto M = j.contains("M") ? j.at("M").get<std::size_t>() : Spectrum::kDefaultTruncation;
  if (kind == "power_law") return Spectrum::power_law(j.at("alpha").get<double>(), M);
  if (kind == "power_log")
    return Spectrum::power_log(j.at("alpha").get<double>(), j.at("beta").get<double>(), M);
  if (kind == "geometric") return Spectrum::geometric(j.at("q").get<double>(), M);
  if (kind == "explicit") return Spectrum::explicit_values(j.at("values").get<std::vector<double>>());
  throw DomainError("unknown spectrum kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// InfoDraw

inline Json to_json(const Functional& f) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointEval>) {
          return Json{{"x", v.x}};
        } else if constexpr (std::is_same_v<T, FourierIndex>) {
          return Json{{"k", v.k}};
        } else {
          return Json{{"g", std::vector<double>(v.g.data(), v.g.data() + v.g.size())}};
        }
      },
      f);
}

inline Json to_json(const InfoDraw& d) {
  Json j;
  j["channel"] = to_string(d.channel);
  j["density"] = to_string(d.density);
  if (const auto* r = std::get_if<RhoN>(&d.density)) j["n"] = r->n;
  Json fs = Json::array();
  for (const auto& f : d.functionals) fs.push_back(to_json(f));
  j["functionals"] = std::move(fs);
  j["weights"] = d.weights;
  j["seed"] = d.seed;
  j["stream"] = d.stream;
  return j;
}

inline InfoDraw info_draw_from_json(const Json& j) {
  InfoDraw d;
  const std::string channel = j.at("channel").get<std::string>();
  if (channel == "point")
    d.channel = Channel::point;
  else if (channel == "gauss")
    d.channel = Channel::gauss;
  else if (channel == "fourier")
    d.channel = Channel::fourier;
  else
    throw DomainError("unknown channel '" + channel + "'");
  const std::string density = j.at("density").get<std::string>();
  if (density == "rho")
    d.density = RhoN{j.at("n").get<std::size_t>()};
  else if (density == "uniform")
    d.density = ConstantDensity{};
  else if (density == "plain")
    d.density = PlainGaussian{};
  else
    throw DomainError("unknown density '" + density + "'");
  for (const auto& f : j.at("functionals")) {
    if (d.channel == Channel::point) {
      d.functionals.push_back(PointEval{f.at("x").get<double>()});
    } else if (d.channel == Channel::fourier) {
      d.functionals.push_back(FourierIndex{f.at("k").get<std::size_t>()});
    } else {
      const auto g = f.at("g").get<std::vector<double>>();
      d.functionals.push_back(
          GaussianCoefs{Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()))});
    }
  }
  d.weights = j.at("weights").get<std::vector<double>>();
  if (d.weights.size() != d.functionals.size())
    throw DomainError("weights and functionals differ in length");
  d.seed = j.value("seed", std::uint64_t{0});
  d.stream = j.value("stream", std::uint64_t{0});
  return d;
}

// ---------------------------------------------------------------------------
// WceReport

inline constexpr std::string_view kWceCsvHeader =
    "channel,density,n,N,M,alpha_hat,beta_hat,wce_exact,wce_bound,theorem_bound,truncation_bias,"
    "pass,seed";

inline std::string to_csv_row(const WceReport& r) {
  std::string s;
  s += r.channel + ',' + r.density + ',';
  s += std::to_string(r.n) + ',' + std::to_string(r.N) + ',' + std::to_string(r.M) + ',';
  for (double v : {r.alpha_hat, r.beta_hat, r.wce_exact, r.wce_bound, r.theorem_bound,
                   r.truncation_bias})
    s += format_number(v) + ',';
  s += r.pass ? "true" : "false";
  s += ',' + std::to_string(r.seed);
  return s;
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline WceReport wce_report_from_csv(std::string_view line) {
  const auto c = split_csv(line);
  if (c.size() != 13) throw DomainError("WceReport CSV row needs 13 cells");
  WceReport r;
  r.channel = c[0];
  r.density = c[1];
  r.n = std::stoull(c[2]);
  r.N = std::stoull(c[3]);
  r.M = std::stoull(c[4]);
  r.alpha_hat = parse_number(c[5]);
  r.beta_hat = parse_number(c[6]);
  r.wce_exact = parse_number(c[7]);
  r.wce_bound = parse_number(c[8]);
  r.theorem_bound = parse_number(c[9]);
  r.truncation_bias = parse_number(c[10]);
  if (c[11] != "true" && c[11] != "false") throw DomainError("pass must be true or false");
  r.pass = c[11] == "true";
  r.seed = std::stoull(c[12]);
  return r;
}

inline Json to_json(const WceReport& r) {
  return Json{{"channel", r.channel},
              {"density", r.density},
              {"n", r.n},
              {"N", r.N},
              {"M", r.M},
              {"alpha_hat", number_json(r.alpha_hat)},
              {"beta_hat", number_json(r.beta_hat)},
              {"wce_exact", number_json(r.wce_exact)},
              {"wce_bound", number_json(r.wce_bound)},
              {"theorem_bound", number_json(r.theorem_bound)},
              {"truncation_bias", number_json(r.truncation_bias)},
              {"pass", r.pass},
              {"seed", r.seed},
              {"stream", r.stream}};
}

inline WceReport wce_report_from_json(const Json& j) {
  WceReport r;
  r.channel = j.at("channel").get<std::string>();
  r.density = j.at("density").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.N = j.at("N").get<std::size_t>();
  r.M = j.at("M").get<std::size_t>();
  r.alpha_hat = number_from_json(j.at("alpha_hat"));
  r.beta_hat = number_from_json(j.at("beta_hat"));
  r.wce_exact = number_from_json(j.at("wce_exact"));
  r.wce_bound = number_from_json(j.at("wce_bound"));
  r.theorem_bound = number_from_json(j.at("theorem_bound"));
  r.truncation_bias = number_from_json(j.at("truncation_bias"));
  r.pass = j.at("pass").get<bool>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.stream = j.value("stream", std::uint64_t{0});
  return r;
}

// ---------------------------------------------------------------------------
// Point sets and distance reports

/// One point per row: "x" in 1-d, "x,y" in 2-d. No header.
inline void write_points_csv(std::ostream& os, const PointSet& p) {
  if (p.dimension() == 1) {
    for (double x : p.points_1d()) os << format_number(x) << '\n';
  } else {
    for (const auto& q : p.points_2d())
      os << format_number(q[0]) << ',' << format_number(q[1]) << '\n';
  }
}

inline PointSet read_points_csv(std::istream& is) {
  std::vector<double> xs;
  std::vector<Point2> pts;
  std::string line;
  int dim = 0;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const int d = static_cast<int>(cells.size());
    if (d != 1 && d != 2) throw DomainError("point rows need one or two coordinates");
    if (dim == 0) dim = d;
    if (d != dim) throw DomainError("mixed point dimensions");
    if (d == 1)
      xs.push_back(parse_number(cells[0]));
    else
      pts.push_back({parse_number(cells[0]), parse_number(cells[1])});
  }
  if (dim == 0) throw DomainError("empty point file");
  return dim == 1 ? PointSet::line(std::move(xs)) : PointSet::plane(std::move(pts));
}

inline Json to_json(const DistReport& r) {
  Json norms = Json::object();
  for (const auto& [g, v] : r.l_gamma_norms) norms[format_number(g)] = number_json(v);
  return Json{{"covering_radius", r.covering_radius}, {"l_gamma_norms", norms}, {"method", r.method}};
}

inline DistReport dist_report_from_json(const Json& j) {
  DistReport r;
  r.covering_radius = j.at("covering_radius").get<double>();
  for (const auto& [k, v] : j.at("l_gamma_norms").items()) r.l_gamma_norms[parse_number(k)] = number_from_json(v);
  r.method = j.at("method").get<std::string>();
  return r;
}

// ---------------------------------------------------------------------------
// Experiment summaries: per-trial CSV tables and JSON digests

inline Json to_json(const Quantiles& q) {
  return Json{{"q05", number_json(q.q05)}, {"q50", number_json(q.q50)}, {"q95", number_json(q.q95)}};
}

inline Json to_json(const RateFit& f) {
  return Json{{"xs", f.xs}, {"ys", f.ys}, {"slope", f.slope}, {"intercept", f.intercept},
              {"r_squared", f.r_squared}};
}

inline std::string wce_rows_csv(const WceSummary& s) {
  std::string out(kWceCsvHeader);
  out += '\n';
  for (const auto& r : s.rows) out += to_csv_row(r.report) + '\n';
  return out;
}

inline constexpr std::string_view kWceGroupCsvHeader =
    "n,N,M,trials,theorem_bound,pass_fraction,three_sigma_fraction,failures,sandwich_violations,"
    "wce_q05,wce_q50,wce_q95";

inline std::string wce_groups_csv(const WceSummary& s) {
  std::string out(kWceGroupCsvHeader);
  out += '\n';
  for (const auto& g : s.groups) {
    out += std::to_string(g.n) + ',' + std::to_string(g.N) + ',' + std::to_string(g.M) + ',' +
           std::to_string(g.trials) + ',' + format_number(g.theorem_bound) + ',' +
           format_number(g.pass_fraction) + ',' + format_number(g.three_sigma_fraction) + ',' +
           std::to_string(g.failures) + ',' + std::to_string(g.sandwich_violations) + ',' +
           format_number(g.wce.q05) + ',' + format_number(g.wce.q50) + ',' +
           format_number(g.wce.q95) + '\n';
  }
  return out;
}

inline Json to_json(const WceSummary& s) {
  Json groups = Json::array();
  for (const auto& g : s.groups) {
    groups.push_back(Json{{"n", g.n},
                          {"N", g.N},
                          {"M", g.M},
                          {"trials", g.trials},
                          {"theorem_bound", number_json(g.theorem_bound)},
                          {"pass_fraction", g.pass_fraction},
                          {"three_sigma_fraction", g.three_sigma_fraction},
                          {"failures", g.failures},
                          {"sandwich_violations", g.sandwich_violations},
                          {"wce", to_json(g.wce)}});
  }
  return Json{{"groups", groups}};
}

inline std::string concentration_csv(const ConcentrationSummary& s) {
  std::string out = "n,N,trial,statistic\n";
  for (const auto& r : s.rows)
    out += std::to_string(r.n) + ',' + std::to_string(r.N) + ',' + std::to_string(r.trial) + ',' +
           format_number(r.statistic) + '\n';
  return out;
}

inline Json to_json(const ConcentrationSummary& s) {
  Json groups = Json::array();
  for (const auto& g : s.groups)
    groups.push_back(Json{{"n", g.n},
                          {"N", g.N},
                          {"M", g.M},
                          {"trials", g.trials},
                          {"fraction_within", g.fraction_within},
                          {"statistic", to_json(g.statistic)}});
  return Json{{"groups", groups}};
}

inline std::string coupon_csv(const CouponReport& r) {
  std::string out = "n,N,trial,min_missing,radius\n";
  for (std::size_t t = 0; t < r.radii.size(); ++t)
    out += std::to_string(r.n) + ',' + std::to_string(r.N) + ',' + std::to_string(t) + ',' +
           std::to_string(r.min_missing[t]) + ',' + format_number(r.radii[t]) + '\n';
  return out;
}

inline Json to_json(const CouponReport& r) {
  return Json{{"n", r.n},
              {"N", r.N},
              {"M", r.M},
              {"trials", r.trials},
              {"coverage_probability", r.coverage_probability},
              {"p_radius_ge_sigma_n", r.p_radius_ge_sigma_n},
              {"p_radius_le_sigma_n1", r.p_radius_le_sigma_n1},
              {"radius", to_json(r.radius)}};
}

inline std::string sobolev_csv(const SobolevRates& s) {
  std::string out = "d,n,mean_covering_radius,covering_ratio";
  if (!s.rows.empty())
    for (const auto& [g, v] : s.rows.front().mean_dist_norm) out += ",mean_dist_L" + format_number(g);
  out += '\n';
  for (const auto& r : s.rows) {
    out += std::to_string(s.d) + ',' + std::to_string(r.n) + ',' +
           format_number(r.mean_covering_radius) + ',' + format_number(r.covering_ratio);
    for (const auto& [g, v] : r.mean_dist_norm) out += ',' + format_number(v);
    out += '\n';
  }
  return out;
}

inline Json to_json(const SobolevRates& s) {
  Json fits = Json::object();
  for (const auto& [g, f] : s.dist_fits) fits[format_number(g)] = to_json(f);
  return Json{{"d", s.d},
              {"trials", s.trials},
              {"method", s.method},
              {"covering_fit", to_json(s.covering_fit)},
              {"dist_fits", fits},
              {"ratio_spread", s.ratio_spread}};
}

inline std::string mls_csv(const MlsRates& m) {
  std::string out = "function,s,m,q,n,mean_error\n";
  for (const auto& se : m.series)
    for (std::size_t i = 0; i < se.n.size(); ++i)
      out += to_string(se.function) + ',' + std::to_string(m.s) + ',' + std::to_string(m.m) + ',' +
             format_number(m.q) + ',' + std::to_string(se.n[i]) + ',' +
             format_number(se.mean_error[i]) + '\n';
  return out;
}

inline Json to_json(const MlsRates& m) {
  Json series = Json::array();
  for (const auto& se : m.series) {
    Json j{{"function", to_string(se.function)}, {"n", se.n}, {"mean_error", se.mean_error}};
    j["fit"] = se.fit ? to_json(*se.fit) : Json(nullptr);
    series.push_back(std::move(j));
  }
  return Json{{"s", m.s},     {"m", m.m},         {"q", number_json(m.q)}, {"kappa", m.kappa},
              {"trials", m.trials}, {"grid", m.grid}, {"series", series}};
}

}  // namespace randinfo
