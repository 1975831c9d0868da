#pragma once

// Command-line front end. parse_args and run are kept separate from main so the
// test suite can drive them directly.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "randinfo/randinfo.hpp"

namespace randinfo::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"wce",  "gaussian", "coupon", "concentration",
                                              "sobolev-dist", "mls", "all"};
  return names;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CliConfig {
  std::string subcommand;
  std::string config_path;
  std::string outdir = ".";
  std::uint64_t seed = 0;
  int verbosity = 0;
  std::size_t threads = 0;

  std::string spectrum_text = "power_law:1.0";
  Spectrum spectrum = Spectrum::power_law(1.0);
  std::size_t truncation = 0;
  std::vector<std::size_t> n_grid;
  std::optional<double> oversample;
  std::optional<std::size_t> samples;
  std::string channel = "fourier";
  std::string density = "rho";
  std::size_t trials = 100;

  // sobolev-dist
  int d = 1;
  std::vector<double> gammas{1.0, 2.0};
  std::size_t grid = 0;

  // mls
  std::size_t s = 2;
  double q = std::numeric_limits<double>::infinity();
  std::string function = "sine";
  double kappa = kDefaultWindowMultiplier;
};

/// "power_law:1.0", "power_log:1.0,0.5", "geometric:0.5", "explicit:1,0.5,0.25".
inline Spectrum parse_spectrum(const std::string& text, std::size_t truncation) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<double> params;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string cell;
    while (std::getline(ss, cell, ',')) params.push_back(parse_number(cell));
  }
  const std::size_t M = truncation > 0 ? truncation : Spectrum::kDefaultTruncation;
  auto need = [&](std::size_t k) {
    if (params.size() != k)
      throw UsageError("spectrum '" + kind + "' takes " + std::to_string(k) + " parameter(s)");
  };
  if (kind == "power_law") {
    need(1);
    return Spectrum::power_law(params[0], M);
  }
  if (kind == "power_log") {
    need(2);
    return Spectrum::power_log(params[0], params[1], M);
  }
  if (kind == "geometric") {
    need(1);
    return Spectrum::geometric(params[0], M);
  }
  if (kind == "explicit") {
    if (params.empty()) throw UsageError("explicit spectrum needs values");
    return Spectrum::explicit_values(params);
  }
  throw UsageError("unknown spectrum kind '" + kind + "'");
}

/// "16,32,64" or "lo:hi" (lo, 2 lo, 4 lo, ... up to hi).
inline std::vector<std::size_t> parse_n_grid(const std::string& text) {
  std::vector<std::size_t> out;
  auto to_size = [](const std::string& s) -> std::size_t {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size() || v == 0) throw UsageError("bad n value '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  try {
    if (const auto colon = text.find(':'); colon != std::string::npos) {
      const std::size_t lo = to_size(text.substr(0, colon));
      const std::size_t hi = to_size(text.substr(colon + 1));
      if (hi < lo) throw UsageError("n grid upper end below lower end");
      for (std::size_t n = lo; n <= hi; n *= 2) out.push_back(n);
    } else {
      std::stringstream ss(text);
      std::string cell;
      while (std::getline(ss, cell, ',')) out.push_back(to_size(cell));
    }
  } catch (const std::logic_error&) {
    throw UsageError("bad n grid '" + text + "'");
  }
  if (out.empty()) throw UsageError("empty n grid");
  return out;
}

inline std::vector<std::size_t> default_grid(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> g;
  for (std::size_t n = lo; n <= hi; n *= 2) g.push_back(n);
  return g;
}

inline CliConfig parse_args(const std::vector<std::string>& argv) {
  if (argv.empty()) throw UsageError("missing subcommand (one of wce, gaussian, coupon, concentration, sobolev-dist, mls, all)");
  CliConfig c;
  c.subcommand = argv.front();
  const auto& subs = subcommands();
  if (std::find(subs.begin(), subs.end(), c.subcommand) == subs.end())
    throw UsageError("unknown subcommand '" + c.subcommand + "'");

  CLI::App app{"randinfo " + c.subcommand, "randinfo " + c.subcommand};
  app.set_help_flag();
  app.set_config("--config", "", "TOML/INI file with flag values; inline flags take precedence");
  std::optional<std::size_t> n;
  std::string n_grid;
  std::string gammas;
  std::string q_text;
  app.add_option("--spectrum", c.spectrum_text, "kind:params, e.g. power_law:1.0");
  app.add_option("--M", c.truncation, "working dimension (default max(8N, 4n, 512))");
  app.add_option("--n", n, "approximation dimension");
  app.add_option("--n-grid", n_grid, "comma list or lo:hi doubling grid");
  app.add_option("--oversample", c.oversample, "C in N = C n ln n");
  app.add_option("--N", c.samples, "explicit sample count");
  app.add_option("--channel", c.channel)->check(CLI::IsMember({"fourier", "point", "gauss"}));
  app.add_option("--density", c.density)->check(CLI::IsMember({"rho", "uniform", "plain"}));
  app.add_option("--trials", c.trials)->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed);
  app.add_option("--outdir", c.outdir);
  app.add_option("--threads", c.threads);
  app.add_option("--d", c.d)->check(CLI::IsMember({1, 2}));
  app.add_option("--gamma", gammas, "comma list of L_gamma exponents");
  app.add_option("--grid", c.grid, "evaluation grid resolution");
  app.add_option("--s", c.s, "smoothness (MLS degree m = s)")->check(CLI::PositiveNumber);
  app.add_option("--q", q_text, "error norm exponent (number or inf)");
  app.add_option("--function", c.function)->check(CLI::IsMember({"sine", "polynomial", "both"}));
  app.add_option("--kappa", c.kappa);
  app.add_flag("-v,--verbose", c.verbosity);

  std::vector<std::string> rest(argv.begin() + 1, argv.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  if (auto* cfg = app.get_config_ptr(); cfg != nullptr && cfg->count() > 0)
    c.config_path = cfg->as<std::string>();

  try {
    c.spectrum = parse_spectrum(c.spectrum_text, c.truncation);
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("bad --spectrum: ") + e.what());
  }
  if (!gammas.empty()) {
    c.gammas.clear();
    std::stringstream ss(gammas);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        c.gammas.push_back(parse_number(cell));
      } catch (const std::exception&) {
        throw UsageError("bad --gamma value '" + cell + "'");
      }
    }
  }
  if (!q_text.empty()) {
    try {
      c.q = parse_number(q_text);
    } catch (const std::exception&) {
      throw UsageError("bad --q value '" + q_text + "'");
    }
    if (!(c.q >= 1.0)) throw UsageError("--q must be >= 1");
  }
  if (n && !n_grid.empty()) throw UsageError("give either --n or --n-grid, not both");
  if (n) {
    if (*n == 0) throw UsageError("--n must be >= 1");
    c.n_grid = {*n};
  } else if (!n_grid.empty()) {
    c.n_grid = parse_n_grid(n_grid);
  }

  const bool needs_n = c.subcommand == "wce" || c.subcommand == "gaussian" ||
                       c.subcommand == "coupon" || c.subcommand == "concentration";
  if (needs_n && c.n_grid.empty()) throw UsageError(c.subcommand + " requires --n or --n-grid");
  if (c.subcommand == "sobolev-dist") {
    if (c.n_grid.empty()) c.n_grid = default_grid(64, 4096);
    if (c.grid == 0) c.grid = kDefaultDistGrid;
    if (!app.count("--trials")) c.trials = 200;
  }
  if (c.subcommand == "mls") {
    if (c.n_grid.empty()) c.n_grid = default_grid(64, 2048);
    if (c.grid == 0) c.grid = kDefaultMlsGrid;
  }
  if (c.subcommand == "gaussian" && !app.count("--density")) c.density = "plain";
  return c;
}

inline Json effective_config(const CliConfig& c) {
  Json j{{"subcommand", c.subcommand},
         {"config", c.config_path},
         {"outdir", c.outdir},
         {"seed", c.seed},
         {"threads", c.threads},
         {"spectrum", to_json(c.spectrum)},
         {"n_grid", c.n_grid},
         {"channel", c.channel},
         {"density", c.density},
         {"trials", c.trials}};
  j["oversample"] = c.oversample ? Json(*c.oversample) : Json(nullptr);
  j["N"] = c.samples ? Json(*c.samples) : Json(nullptr);
  j["truncation"] = c.truncation;
  if (c.subcommand == "sobolev-dist") {
    j["d"] = c.d;
    j["gammas"] = c.gammas;
    j["grid"] = c.grid;
  }
  if (c.subcommand == "mls") {
    j["s"] = c.s;
    j["q"] = number_json(c.q);
    j["function"] = c.function;
    j["grid"] = c.grid;
    j["kappa"] = c.kappa;
  }
  return j;
}

inline Channel channel_from(const std::string& s) {
  return s == "point" ? Channel::point : s == "gauss" ? Channel::gauss : Channel::fourier;
}

inline DensityKind density_from(const std::string& s) {
  return s == "uniform" ? DensityKind::uniform : s == "plain" ? DensityKind::plain : DensityKind::rho;
}

inline OversamplingRule oversampling_from(const CliConfig& c, bool round_down) {
  if (c.samples) return OversamplingRule::fixed(*c.samples);
  return OversamplingRule::log_linear(c.oversample.value_or(kDefaultOversampling), round_down);
}

inline TrialConfig trial_config(const CliConfig& c) {
  TrialConfig t;
  t.channel = channel_from(c.channel);
  t.density = density_from(c.density);
  t.spectrum = c.spectrum;
  t.n_grid = c.n_grid;
  t.oversampling = oversampling_from(c, false);
  t.trials = c.trials;
  t.seed = c.seed;
  t.truncation = c.truncation;
  t.threads = c.threads;
  return t;
}

struct Output {
  std::string csv;
  Json summary;
};

inline Output execute(const CliConfig& c, std::ostream& log) {
  const auto& sub = c.subcommand;
  if (sub == "wce") {
    const WceSummary s = run_wce_trials(trial_config(c));
    return {wce_rows_csv(s), to_json(s)};
  }
  if (sub == "gaussian") {
    TrialConfig t = trial_config(c);
    t.channel = Channel::gauss;
    t.oversampling = c.samples ? OversamplingRule::fixed(*c.samples) : OversamplingRule::linear(2.0);
    const WceSummary s = run_wce_trials(t);
    return {wce_rows_csv(s), to_json(s)};
  }
  if (sub == "concentration") {
    const ConcentrationSummary s = run_concentration(trial_config(c));
    return {concentration_csv(s), to_json(s)};
  }
  if (sub == "coupon") {
    std::string csv;
    Json reports = Json::array();
    for (std::size_t n : c.n_grid) {
      const std::size_t N = oversampling_from(c, true).samples(n);
      const CouponReport r = run_coupon(c.spectrum, n, N, c.trials, c.seed, c.threads, c.truncation);
      const std::string part = coupon_csv(r);
      csv += csv.empty() ? part : part.substr(part.find('\n') + 1);
      reports.push_back(to_json(r));
    }
    return {csv, Json{{"reports", reports}}};
  }
  if (sub == "sobolev-dist") {
    const SobolevRates r = run_sobolev_rates(c.d, c.gammas, c.n_grid, c.trials, c.seed, c.grid, c.threads);
    return {sobolev_csv(r), to_json(r)};
  }
  if (sub == "mls") {
    std::vector<TestFunction> fs;
    if (c.function != "polynomial") fs.push_back(TestFunction::sine);
    if (c.function != "sine") fs.push_back(TestFunction::polynomial);
    const MlsRates r = run_mls_rates(c.s, c.q, fs, c.n_grid, c.trials, c.seed, c.grid, c.kappa, c.threads);
    return {mls_csv(r), to_json(r)};
  }
  // all
  AcceptanceOptions opt;
  opt.seed = c.seed;
  opt.threads = c.threads;
  if (c.verbosity > 0)
    opt.on_result = [&log](const CriterionResult& r) {
      log << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << " -- " << r.detail << '\n';
    };
  const AcceptanceRun run = run_acceptance(opt);
  Json j = run.digest;
  Json artifacts = Json::array();
  for (const auto& a : run.artifacts) {
    const auto path = std::filesystem::path(c.outdir) /
                      ("all-" + std::to_string(c.seed) + "-" + a.name + ".csv");
    std::ofstream f(path, std::ios::binary);
    f << a.csv;
    if (!f) throw std::runtime_error("cannot write " + path.string());
    artifacts.push_back(path.filename().string());
  }
  j["artifacts"] = artifacts;
  return {acceptance_csv(run), j};
}

inline int run(const CliConfig& c, std::ostream& out, std::ostream& err) {
  try {
    std::filesystem::create_directories(c.outdir);
  } catch (const std::exception& e) {
    err << "randinfo: cannot create output directory: " << e.what() << '\n';
    return kFailure;
  }
  Output result;
  try {
    result = execute(c, err);
  } catch (const DivergentSpectrum& e) {
    err << "randinfo: refused: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    err << "randinfo: " << c.subcommand << " failed: " << e.what() << '\n';
    return kFailure;
  }
  const std::string stem = c.subcommand + "-" + std::to_string(c.seed);
  const auto dir = std::filesystem::path(c.outdir);
  Json digest{{"config", effective_config(c)}, {"summary", result.summary}};
  {
    std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
    csv << result.csv;
    std::ofstream json(dir / (stem + ".json"), std::ios::binary);
    json << digest.dump(2) << '\n';
    if (!csv || !json) {
      err << "randinfo: cannot write outputs under " << dir.string() << '\n';
      return kFailure;
    }
  }
  if (c.verbosity > 0) out << "wrote " << (dir / (stem + ".csv")).string() << " and .json\n";
  return kOk;
}

inline std::string usage() {
  return "usage: randinfo <wce|gaussian|coupon|concentration|sobolev-dist|mls|all> [flags]\n"
         "  --spectrum kind:params  --n N | --n-grid a,b,c | lo:hi  --oversample C  --N count\n"
         "  --channel fourier|point|gauss  --density rho|uniform|plain  --trials T  --seed S\n"
         "  --outdir DIR  --threads K  --config FILE  -v\n"
         "  sobolev-dist: --d 1|2 --gamma g1,g2 --grid R    mls: --s S --q Q --function sine|polynomial|both\n";
}

/// parse_args + run with usage handling; the value is the process exit code.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  try {
    c = parse_args(args);
  } catch (const UsageError& e) {
    err << "randinfo: " << e.what() << '\n' << usage();
    return kUsage;
  }
  return run(c, out, err);
}

}  // namespace randinfo::cli
