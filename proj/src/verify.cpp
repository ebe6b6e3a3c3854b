#include "stochwave/verify.hpp"

#include "stochwave/analysis.hpp"
#include "stochwave/dynamics.hpp"
#include "stochwave/noise.hpp"
#include "stochwave/nonlinearity.hpp"
#include "stochwave/spectral_basis.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace stochwave {

namespace {

void add(SuiteResult& r, std::string name, double value, double bound, bool passed) {
  r.checks.push_back({std::move(name), passed, value, bound});
}

void at_most(SuiteResult& r, std::string name, double value, double bound) {
  add(r, std::move(name), value, bound, value <= bound);
}

void at_least(SuiteResult& r, std::string name, double value, double bound) {
  add(r, std::move(name), value, bound, value >= bound);
}

void suite_basis(SuiteResult& r) {
  struct Case {
    std::string name;
    Domain domain;
    int m;
  };
  const Case cases[] = {{"interval", Domain::interval(1.0), 32}, {"interval_L3", Domain::interval(3.0), 16},
                        {"rectangle", Domain::rectangle(1.0, 2.0), 6}};
  for (const Case& c : cases) {
    const SpectralBasis b = build_basis(c.domain, c.m, default_grid_size(c.m));
    const Eigen::MatrixXd gram = b.projection_matrix() * b.eval_matrix();
    const double orth = (gram - Eigen::MatrixXd::Identity(b.size(), b.size())).cwiseAbs().maxCoeff();
    at_most(r, c.name + ".orthonormality", orth, 1e-12);

    ModalVector u = ModalVector::zero(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) u[i] = std::cos(1.7 * static_cast<double>(i)) / (1.0 + i);
    const double parseval = h1_seminorm_sq(u, b);
    const double quad = h1_seminorm_sq_quadrature(u, b);
    at_most(r, c.name + ".gradient_norm_routes", std::abs(parseval - quad) / parseval, 1e-10);

    const ModalVector back = to_coeffs(to_grid(u, b), b);
    at_most(r, c.name + ".round_trip", (back.coeffs - u.coeffs).cwiseAbs().maxCoeff(), 1e-12);
  }
}

void suite_yosida(SuiteResult& r) {
  const double qs[] = {2.0, 2.5, 3.0, 4.0};
  const double lambdas[] = {1e-3, 1e-2, 1e-1, 1.0};
  constexpr int kX = 625;
  double worst_slope = 0.0;  // max over samples of slope - 1/lambda
  double worst_neg_slope = 0.0;
  double worst_g = -1e300;
  double worst_lip = -1e300;
  double worst_forms = 0.0;
  for (double q : qs) {
    for (double lam : lambdas) {
      for (int k = 0; k < kX; ++k) {
        const double x = -1e3 + 2e3 * k / (kX - 1);
        const double gl = g_yosida(x, q, lam);
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        const double slope = (g_yosida(x + h, q, lam) - g_yosida(x - h, q, lam)) / (2.0 * h);
        worst_slope = std::max(worst_slope, slope - 1.0 / lam);
        worst_neg_slope = std::min(worst_neg_slope, slope);
        worst_g = std::max(worst_g, std::abs(gl) - std::abs(g_pow(x, q)));
        worst_lip = std::max(worst_lip, std::abs(gl) - std::abs(x) / lam);
        worst_forms = std::max(worst_forms, std::abs(gl - g_yosida_difference_form(x, q, lam)) /
                                                std::max(1.0, std::abs(gl)));
      }
    }
  }
  at_most(r, "slope_minus_inverse_lambda", worst_slope, 1e-6);
  at_least(r, "slope_min", worst_neg_slope, -1e-6);
  at_most(r, "abs_g_lambda_minus_abs_g", worst_g, 1e-10);
  at_most(r, "abs_g_lambda_minus_abs_x_over_lambda", worst_lip, 1e-10);
  at_most(r, "composition_vs_difference_form", worst_forms, 1e-10);

  double worst_gap = 0.0;
  for (double q : qs) {
    for (int k = 0; k <= 40; ++k) {
      const double x = -2.0 + 0.1 * k;
      const double lam = std::ldexp(1.0, -30);
      worst_gap = std::max(worst_gap, std::abs(g_yosida(x + lam, q, lam) - g_pow(x, q)));
    }
  }
  at_most(r, "convergence_gap_n30", worst_gap, 1e-6);
}

void suite_noise(SuiteResult& r) {
  const SpectralBasis b = build_basis(Domain::interval(1.0), 8, default_grid_size(8));
  NoiseSpec spec;
  spec.lambda = make_spectrum(b, 1.0, 1.0);
  spec.eps = 1.0;
  const double dt = 1e-2;
  constexpr int kN = 100000;
  const NoiseStream stream(12345);
  const auto n = static_cast<std::size_t>(b.size());
  std::vector<double> s1(n, 0.0), s2(n, 0.0);
  std::vector<std::vector<double>> draws(n, std::vector<double>(kN));
  for (int k = 0; k < kN; ++k) {
    const WienerIncrement inc = stream.increment(spec, dt, static_cast<std::uint64_t>(k));
    for (std::size_t i = 0; i < n; ++i) draws[i][static_cast<std::size_t>(k)] = inc.dW[static_cast<Eigen::Index>(i)];
  }
  int within = 0;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (double x : draws[i]) mean += x;
    mean /= kN;
    double m2 = 0.0, m4 = 0.0;
    for (double x : draws[i]) {
      const double d = (x - mean) * (x - mean);
      m2 += d;
      m4 += d * d;
    }
    const double var = m2 / (kN - 1);
    m4 /= kN;
    const double se = std::sqrt((m4 - var * var) / kN);
    const double z = std::abs(var - spec.lambda[i] * dt) / se;
    worst_z = std::max(worst_z, z);
    within += z <= 3.0;
  }
  add(r, "per_mode_variance_within_3se", static_cast<double>(within), static_cast<double>(n),
      within == static_cast<int>(n));
  add(r, "per_mode_variance_worst_z", worst_z, 3.0, worst_z <= 3.0);

  // The modal forcing of the model equals the grid-route projection of eps sigma dW.
  SimConfig cfg;
  cfg.modes = 8;
  cfg.noise = spec;
  cfg.noise.eps = 0.3;
  cfg.noise.kappa = 0.7;
  cfg.noise.sigma0 = FieldProfile::sine(1.0);
  cfg.horizon = 1.0;
  const GalerkinModel model(cfg);
  const NoiseStream path(99);
  double worst = 0.0;
  for (std::int64_t k = 0; k < 50; ++k) {
    const ModalVector a = model.forcing(path, k);
    const ModalVector g = forcing_coeffs(cfg.noise, path.increment(cfg.noise, model.dt(), static_cast<std::uint64_t>(k)),
                                         static_cast<double>(k) * model.dt(), model.basis());
    worst = std::max(worst, (a.coeffs - g.coeffs).cwiseAbs().maxCoeff());
  }
  at_most(r, "forcing_routes_agree", worst, 1e-13);
}

void suite_energy(SuiteResult& r) {
  SimConfig cfg;
  cfg.modes = 32;
  cfg.exponents = {2.0, 4.0, 1};
  cfg.horizon = 1.0;
  cfg.noise.lambda.assign(32, 0.0);
  cfg.u0 = FieldProfile::modal({0.5});
  double prev = 0.0;
  for (double dt : {1e-3, 5e-4, 2.5e-4}) {
    cfg.dt = dt;
    const TrajectoryRecord rec = simulate_path(cfg, 0);
    const double res = max_abs(energy_identity_residual(rec));
    add(r, "max_residual_dt_" + format_double(dt), res, 0.0, std::isfinite(res));
    if (prev > 0.0) at_least(r, "halving_factor_dt_" + format_double(dt), prev / res, 1.8);
    prev = res;
  }
}

void suite_ode(SuiteResult& r) {
  for (double alpha : {0.05, 0.1, 0.2}) {
    for (double K : {0.5, 1.0, 2.0}) {
      const double closed = blowup_time_closed_form(1.5, K, alpha);
      const double numeric = blowup_time_numeric(1.5, K, alpha);
      at_most(r, "alpha_" + format_double(alpha) + "_K_" + format_double(K), std::abs(numeric - closed) / closed,
              0.01);
    }
  }
}

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"basis", "yosida", "noise", "energy", "ode"};
  return names;
}

SuiteResult run_verify_suite(std::string_view name) {
  SuiteResult r;
  r.suite = std::string(name);
  const auto start = std::chrono::steady_clock::now();
  if (name == "basis") suite_basis(r);
  else if (name == "yosida") suite_yosida(r);
  else if (name == "noise") suite_noise(r);
  else if (name == "energy") suite_energy(r);
  else if (name == "ode") suite_ode(r);
  else throw std::invalid_argument("unknown suite '" + std::string(name) + "'");
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::string verify_report_json(const std::vector<SuiteResult>& results) {
  nlohmann::json j;
  bool all = true;
  j["suites"] = nlohmann::json::array();
  for (const SuiteResult& s : results) {
    nlohmann::json js{{"suite", s.suite}, {"passed", s.passed()}, {"seconds", s.seconds}};
    js["checks"] = nlohmann::json::array();
    for (const VerifyCheck& c : s.checks) {
      js["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}});
    }
    j["suites"].push_back(js);
    all = all && s.passed();
  }
  j["passed"] = all;
  return j.dump(2) + "\n";
}

}  // namespace stochwave
