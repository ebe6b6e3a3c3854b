// stochwave: simulate / ensemble / analyze / verify driver.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration or usage error,
// 3 runtime or storage error.

#include "stochwave/analysis.hpp"
#include "stochwave/config.hpp"
#include "stochwave/ensemble.hpp"
#include "stochwave/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace stochwave;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed for " + file.string());
}

json nullable(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

// Finite doubles as numbers, everything else as null (JSON has no inf/nan).
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void print_warnings(const GalerkinModel& model) {
  for (const std::string& w : model.warnings()) std::cerr << "warning: " << w << '\n';
}

int cmd_simulate(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
                 std::optional<int> stride) {
  RunConfig cfg = load_run_config(config_path);
  if (stride) {
    if (*stride < 1) throw ConfigError("--stride", "must be >= 1");
    cfg.ensemble.record_stride = *stride;
  }
  const GalerkinModel model(cfg.sim());
  print_warnings(model);
  const std::uint64_t s = seed ? *seed : derive_path_seed(cfg.ensemble.master_seed, 0);
  const TrajectoryRecord rec = model.simulate_path(s, cfg.ensemble.record_stride);
  write_trajectory_csv(out, rec);

  std::cout << "seed " << s << '\n';
  std::cout << "steps " << model.steps() << " dt " << format_double(model.dt()) << '\n';
  std::cout << "stop " << to_string(rec.stop.reason) << " t " << format_double(rec.stop.t) << " step "
            << rec.stop.step << '\n';
  std::cout << "max |energy residual| " << format_double(max_abs(energy_identity_residual(rec))) << '\n';
  std::cout << "sup e " << format_double(rec.sup_e) << '\n';
  std::cout << "wrote " << out << '\n';
  return kOk;
}

int cmd_ensemble(const std::string& config_path, std::optional<int> paths, const std::string& out,
                 std::optional<int> workers) {
  RunConfig cfg = load_run_config(config_path);
  if (paths) {
    if (*paths < 1) throw ConfigError("--paths", "must be >= 1");
    cfg.ensemble.paths = *paths;
  }
  if (workers && *workers < 1) throw UsageError("--workers must be >= 1");
  const GalerkinModel model(cfg.sim());
  print_warnings(model);
  const EnsembleResult res = run_ensemble(model, cfg.ensemble, workers.value_or(0));

  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create " + out + ": " + ec.message());
  write_text(fs::path(out) / "config.json", dump_run_config(cfg, &model));
  write_ensemble_outputs(out, res);

  const Proportion p = estimate_blowup_probability(res.stats, cfg.sim().horizon);
  const SupEnergy se = sup_energy_estimate(res.stats);
  std::cout << "paths " << cfg.ensemble.paths << " steps " << model.steps() << " dt " << format_double(model.dt())
            << '\n';
  std::cout << "blow-up probability " << format_double(p.phat) << " +- " << format_double(p.half_width) << '\n';
  std::cout << "E sup e " << format_double(se.mean) << " +- " << format_double(se.se) << " (" << se.used
            << " paths, " << se.excluded << " excluded)\n";
  std::cout << "wrote " << out << '\n';
  return kOk;
}

EnsembleResult load_run(const fs::path& dir, const RunConfig& cfg, const GalerkinModel& model) {
  EnsembleResult res;
  for (int k = 0; k < cfg.ensemble.paths; ++k) {
    res.records.push_back(read_trajectory_csv(dir / "paths" / ("path_" + std::to_string(k) + ".csv")));
  }
  res.stats = aggregate(res.records, model.steps(), model.dt(), cfg.ensemble.record_stride);
  return res;
}

void write_h_csv(const fs::path& file, const HSeries& h) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os << "t,F,H,H_se,mean_uv,mean_vq,dH_dt,dissipation_rate,rate_gap_se,rate_match\n";
  for (std::size_t g = 0; g < h.t.size(); ++g) {
    os << format_double(h.t[g]) << ',' << format_double(h.F[g]) << ',' << format_double(h.H[g]) << ','
       << format_double(h.H_se[g]) << ',' << format_double(h.mean_uv[g]) << ',' << format_double(h.mean_vq[g]);
    if (g < h.dH_dt.size()) {
      os << ',' << format_double(h.dH_dt[g]) << ',' << format_double(h.dissipation_rate[g]) << ','
         << format_double(h.rate_gap_se[g]) << ',' << (h.rate_match[g] ? 1 : 0);
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
}

void write_l_csv(const fs::path& file, const LSeries& l) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  os << "t,L,dL_se\n";
  for (std::size_t g = 0; g < l.t.size(); ++g) {
    os << format_double(l.t[g]) << ',' << format_double(l.L[g]) << ',';
    if (g < l.dL_se.size()) os << format_double(l.dL_se[g]);
    os << '\n';
  }
}

int cmd_analyze(const std::string& run_dir, std::optional<double> beta, std::optional<double> K) {
  const fs::path dir(run_dir);
  RunConfig cfg = load_run_config(dir / "config.json");
  if (beta) {
    if (!(*beta > 0.0)) throw ConfigError("--beta", "must be > 0");
    cfg.beta = *beta;
  }
  if (K) {
    if (!(*K > 0.0)) throw ConfigError("--K", "must be > 0");
    cfg.K = *K;
  }
  const GalerkinModel model(cfg.sim());
  const EnsembleResult ens = load_run(dir, cfg, model);
  const double p = cfg.sim().exponents.p;
  const double q = cfg.sim().exponents.q;

  json report;
  report["version"] = kVersion;
  report["paths"] = cfg.ensemble.paths;

  std::optional<double> E0;
  try {
    const Certificate c = certificate(model, cfg.beta);
    E0 = c.E0;
    report["certificate"] = {{"satisfied", c.satisfied}, {"E0", c.E0},       {"E1", c.E1},
                             {"beta", cfg.beta},         {"E1_coarse", c.E1_coarse},
                             {"satisfied_coarse", c.satisfied_coarse}};
  } catch (const std::domain_error& e) {
    report["certificate"] = {{"satisfied", nullptr}, {"note", e.what()}};
  }

  const HSeries h = h_series(ens, model);
  write_h_csv(dir / "h_series.csv", h);
  report["H"] = {{"file", "h_series.csv"},
                 {"H0", num(h.H.empty() ? NAN : h.H.front())},
                 {"H0_above_one", h.H0_above_one},
                 {"nondecreasing", h.nondecreasing},
                 {"rate_match_fraction", h.match_fraction}};
  if (!h.H0_above_one) report["H"]["warning"] = "H(0) <= 1";

  const Proportion prob = estimate_blowup_probability(ens.stats, cfg.sim().horizon);
  report["blowup_probability"] = {{"phat", prob.phat}, {"half_width", prob.half_width}};
  const SupEnergy se = sup_energy_estimate(ens.stats);
  report["sup_energy"] = {{"mean", se.mean}, {"se", se.se}, {"used", se.used}, {"excluded", se.excluded}};

  if (!(p > q)) {
    report["alpha"] = nullptr;
    report["L"] = {{"note", "blow-up analysis needs p > q"}};
    report["T0"] = {{"from_energy", nullptr}, {"from_L0", nullptr}, {"note", "blow-up analysis needs p > q"}};
  } else {
    const BlowupParams bp = cfg.blowup();
    report["alpha"] = bp.alpha;
    report["mu"] = bp.mu;
    std::optional<double> L0;
    try {
      const LSeries l = l_series(ens, h, bp);
      write_l_csv(dir / "l_series.csv", l);
      L0 = l.L.front();
      report["L"] = {{"file", "l_series.csv"},
                     {"L0", l.L.front()},
                     {"positive_start", l.positive_start},
                     {"nondecreasing", l.nondecreasing}};
      if (!l.nondecreasing) report["L"]["first_decrease_t"] = l.t[l.first_decrease];
    } catch (const std::domain_error& e) {
      report["L"] = {{"note", std::string("inapplicable: ") + e.what()}};
    }
    const LifespanBound T0 = lifespan_bound(E0.value_or(0.0), L0, bp);
    report["T0"] = {{"from_energy", nullable(T0.from_energy)}, {"from_L0", nullable(T0.from_L0)}};
    if (!T0.note.empty()) report["T0"]["note"] = T0.note;
    report["K"] = nullable(bp.K);
  }

  json moments = json::array();
  for (double s : {2.0, p}) {
    const MomentBoundReport r = moment_bound_check(ens, p, s);
    moments.push_back({{"s", s}, {"C", r.C}, {"points", r.points}, {"violations", r.violations},
                     {"degenerate", r.degenerate}});
  }
  report["moment_bound"] = moments;

  write_text(dir / "analysis.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << '\n';
  return kOk;
}

int cmd_verify(const std::vector<std::string>& suites) {
  std::vector<std::string> names = suites;
  if (names.empty()) names = verify_suites();
  for (const std::string& n : names) {
    if (std::find(verify_suites().begin(), verify_suites().end(), n) == verify_suites().end()) {
      std::string list;
      for (const std::string& s : verify_suites()) list += (list.empty() ? "" : ", ") + s;
      throw UsageError("unknown suite '" + n + "'; available: " + list);
    }
  }
  std::vector<SuiteResult> results;
  bool ok = true;
  for (const std::string& n : names) {
    results.push_back(run_verify_suite(n));
    ok = ok && results.back().passed();
  }
  std::cout << verify_report_json(results);
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-Galerkin Monte Carlo simulator for damped stochastic wave equations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> paths;
  std::optional<int> workers;
  std::optional<int> stride;
  std::optional<double> beta;
  std::optional<double> K;
  std::vector<std::string> suites;

  auto* sim = app.add_subcommand("simulate", "Run one path and write its trajectory CSV");
  sim->add_option("config", config_path, "Run configuration (JSON)")->required();
  sim->add_option("--seed", seed, "Path seed (default: seed of path 0 of the ensemble)");
  sim->add_option("--stride", stride, "Record every k-th step (overrides ensemble.record_stride)");
  sim->add_option("--out", out, "Output CSV")->default_val("trajectory.csv");

  auto* ens = app.add_subcommand("ensemble", "Run an ensemble and write a run directory");
  ens->add_option("config", config_path, "Run configuration (JSON)")->required();
  ens->add_option("--paths", paths, "Path count (overrides ensemble.paths)");
  ens->add_option("--workers", workers, "Worker threads (default: STOCHWAVE_WORKERS or hardware)");
  ens->add_option("--out", out, "Run directory")->default_val("run");

  auto* ana = app.add_subcommand("analyze", "Blow-up functionals of a run directory");
  ana->add_option("run_dir", out, "Run directory written by 'ensemble'")->required();
  ana->add_option("--beta", beta, "Certificate margin (overrides blowup.beta)");
  ana->add_option("--K", K, "Constant of the differential inequality for the lifespan bound");

  auto* ver = app.add_subcommand("verify", "Run invariant suites and print a JSON report");
  ver->add_option("--suite", suites, "Suite name (repeatable; default: all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*sim) return cmd_simulate(config_path, seed, out, stride);
    if (*ens) return cmd_ensemble(config_path, paths, out, workers);
    if (*ana) return cmd_analyze(out, beta, K);
    if (*ver) return cmd_verify(suites);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
