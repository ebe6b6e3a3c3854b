#pragma once

#include "stochwave/noise.hpp"
#include "stochwave/nonlinearity.hpp"
#include "stochwave/spectral_basis.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stochwave {

struct SimConfig {
  Domain domain = Domain::interval(1.0);
  int modes = 16;  // per axis
  int grid = 0;    // per axis; 0 selects default_grid_size(modes)
  Exponents exponents;
  std::optional<CutoffLevel> cutoff;    // none: raw source f
  std::optional<double> yosida_lambda;  // none: exact damping g
  double dt = 0.0;                      // <= 0 selects 0.25 / sqrt(mu_max)
  double horizon = 1.0;
  double blowup_threshold = 1e6;
  NoiseSpec noise;
  FieldProfile u0;
  FieldProfile u1;
};

/// Time t and modal coefficients of u and v = u_t.
struct ModalState {
  double t = 0.0;
  ModalVector a;
  ModalVector b;
};

struct EnergySnapshot {
  double e_val = 0.0;  // ||v||^2 + ||grad u||^2 + (2/p) ||u||_p^p
  double E_val = 0.0;  // 1/2 ||v||^2 + 1/2 ||grad u||^2 - (1/p) ||u||_p^p
};

/// One recorded time-grid point. Integrals are cumulative from t = 0 and use
/// left-endpoint (Ito) sums.
struct TrajectoryRow {
  std::int64_t step = 0;
  double t = 0.0;
  double v_l2_sq = 0.0;
  double grad_u_sq = 0.0;
  double u_lp_p = 0.0;
  double v_lq_q = 0.0;
  double u_dot_v = 0.0;
  double e_energy = 0.0;
  double calE = 0.0;
  double damping_int = 0.0;      // int (damping(v), v) ds
  double source_work_int = 0.0;  // int (source(u), v) ds
  double stoch_int = 0.0;        // int (v, eps sigma dW)
  double ito_corr_int = 0.0;     // eps^2 int Galerkin noise trace ds
  double noise_qv = 0.0;         // sum of squared modal noise increments
};

/// Real-valued columns of TrajectoryRow in CSV order (step is written separately).
inline constexpr std::array<std::pair<std::string_view, double TrajectoryRow::*>, 13> kTrajectoryColumns{{
    {"t", &TrajectoryRow::t},
    {"v_l2_sq", &TrajectoryRow::v_l2_sq},
    {"grad_u_sq", &TrajectoryRow::grad_u_sq},
    {"u_lp_p", &TrajectoryRow::u_lp_p},
    {"v_lq_q", &TrajectoryRow::v_lq_q},
    {"u_dot_v", &TrajectoryRow::u_dot_v},
    {"e_energy", &TrajectoryRow::e_energy},
    {"calE", &TrajectoryRow::calE},
    {"damping_int", &TrajectoryRow::damping_int},
    {"source_work_int", &TrajectoryRow::source_work_int},
    {"stoch_int", &TrajectoryRow::stoch_int},
    {"ito_corr_int", &TrajectoryRow::ito_corr_int},
    {"noise_qv", &TrajectoryRow::noise_qv},
}};

enum class StopReason { completed, threshold, non_finite };

std::string_view to_string(StopReason r);
StopReason stop_reason_from_string(std::string_view s);

struct StopInfo {
  StopReason reason = StopReason::completed;
  double t = 0.0;
  std::int64_t step = 0;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::vector<TrajectoryRow> rows;
  StopInfo stop;
  double sup_e = 0.0;  // max of e(u) over every step, not only recorded rows
};

/// Precomputed, immutable discretization of a SimConfig. Shareable across threads.
class GalerkinModel {
 public:
  explicit GalerkinModel(SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  const SpectralBasis& basis() const { return basis_; }
  double dt() const { return dt_; }
  std::int64_t steps() const { return steps_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  ModalState initial_state() const;
  EnergySnapshot energy(const ModalState& s) const;

  /// Deterministic drift (da, db) of the Galerkin system.
  std::pair<ModalVector, ModalVector> drift(const ModalState& s) const;

  /// One semi-implicit Euler-Maruyama step (trapezoidal in the linear part) with the given modal noise forcing.
  ModalState step(const ModalState& s, const ModalVector& forcing) const;

  /// Modal noise forcing of step `k` drawn from the path's stream.
  ModalVector forcing(const NoiseStream& stream, std::int64_t k) const;

  /// eps^2 * Galerkin noise trace at time t (the Ito correction rate).
  double ito_rate(double t) const;

  TrajectoryRecord simulate_path(std::uint64_t seed, int record_stride = 1) const;

 private:
  struct Scratch;
  void nonlinear_terms(const ModalState& s, Scratch& w) const;

  SimConfig cfg_;
  SpectralBasis basis_;
  double dt_ = 0.0;
  std::int64_t steps_ = 0;
  Eigen::MatrixXd noise_map_;  // entry (j, i) = (sigma0 e_i, e_j)
  double galerkin_trace_ = 0.0;
  std::vector<std::string> warnings_;
};

/// Validates a configuration; throws std::invalid_argument naming the field.
void validate_config(const SimConfig& cfg);

std::pair<ModalVector, ModalVector> drift(const ModalState& s, const GalerkinModel& model);
ModalState step(const ModalState& s, const GalerkinModel& model, const NoiseStream& stream, std::int64_t k);
TrajectoryRecord simulate_path(const SimConfig& cfg, std::uint64_t seed, int record_stride = 1);

/// LHS - RHS of the energy equation on every recorded row.
std::vector<double> energy_identity_residual(const TrajectoryRecord& rec);
double max_abs(const std::vector<double>& v);

/// First recorded time with ||grad u||_2 >= threshold.
std::optional<double> stopping_time(const TrajectoryRecord& rec, double threshold);

}  // namespace stochwave
