#pragma once

#include "stochwave/dynamics.hpp"
#include "stochwave/ensemble.hpp"

#include <optional>
#include <string>
#include <vector>

namespace stochwave {

struct BlowupParams {
  double alpha = 0.0;
  double mu = 1e-3;
  double beta = 0.1;
  std::optional<double> K;
};

/// alpha must lie strictly inside (0, min{1/2, (p-q)/(pq)}).
bool alpha_admissible(double alpha, double p, double q);

/// Midpoint of the admissible window: 1/2 min{1/2, (p-q)/(pq)}. Throws for p <= q.
double alpha_select(double p, double q);

/// Initial-energy test E(0) <= -(1+beta) E1.
struct Certificate {
  bool satisfied = false;
  double E0 = 0.0;
  double E1 = 0.0;         // F(inf)
  double E1_coarse = 0.0;  // 1/2 eps^2 c0^2 TrR int int sigma^2
  bool satisfied_coarse = false;
};

/// Throws std::domain_error when eps > 0 and kappa <= 0.
Certificate certificate(const GalerkinModel& model, double beta);

/// Ensemble functionals on the aggregate time grid, cut at the first point where no
/// path is alive. H = F - mean(calE).
/// Interval quantities (index g covers [t_g, t_{g+1}]) are compared against the
/// path-wise dissipation rate Delta(int (damping(v), v)) / Delta t.
struct HSeries {
  std::vector<double> t;
  std::vector<double> F;  // Galerkin-consistent injected energy
  std::vector<double> H;
  std::vector<double> H_se;
  std::vector<double> mean_uv;
  std::vector<double> mean_vq;  // pointwise mean ||v||_q^q

  std::vector<double> dH_dt;
  std::vector<double> dissipation_rate;  // mean of path-wise Delta(damping_int)/Delta t
  std::vector<double> rate_gap_se;       // SE of the paired difference dH/dt - dissipation rate
  std::vector<double> dH_se;             // SE of Delta H
  std::vector<bool> rate_match;          // |dH/dt - rate| <= 3 SE + tol
  std::vector<bool> no_decrease;         // Delta H >= -3 SE - tol

  double match_fraction = 0.0;
  bool nondecreasing = true;
  bool H0_above_one = false;
};

HSeries h_series(const EnsembleResult& ens, const GalerkinModel& model, double tol = 0.0);

struct LSeries {
  std::vector<double> t;
  std::vector<double> L;
  std::vector<double> dL_se;  // linearized SE of each increment
  bool positive_start = false;
  bool nondecreasing = false;
  std::size_t first_decrease = 0;  // index of the first violating interval when !nondecreasing
};

/// L(t) = H^(1-alpha) + mu E(u, v). Throws std::domain_error if H <= 0 anywhere on the grid.
LSeries l_series(const EnsembleResult& ens, const HSeries& h, const BlowupParams& params, double tol = 0.0);

/// Closed-form divergence time of L' = K L^(1/(1-alpha)) from L(0) = L0.
double blowup_time_closed_form(double L0, double K, double alpha);

/// Divergence time of the same ODE by RK4 in log L with steps scaled to the local growth rate.
double blowup_time_numeric(double L0, double K, double alpha);

struct LifespanBound {
  std::optional<double> from_energy;  // (1-alpha) / (alpha K |E(0)|^(alpha/(1-alpha)))
  std::optional<double> from_L0;      // same with L(0) in place of |E(0)|
  std::string note;
};

/// Throws std::invalid_argument for K <= 0.
LifespanBound lifespan_bound(double E0, std::optional<double> L0, const BlowupParams& params);

struct MomentBoundReport {
  double C = 0.0;        // smallest constant making LHS <= C * RHS on the grid
  int points = 0;
  int violations = 0;    // RHS <= 0 while LHS > 0
  int degenerate = 0;    // LHS == 0 and RHS <= 0
};

/// E ||u||_p^s <= C (F - H - E||v||^2 + E||u||_p^p) for 2 <= s <= p.
MomentBoundReport moment_bound_check(const EnsembleResult& ens, double p, double s);

}  // namespace stochwave
