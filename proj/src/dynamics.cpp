#include "stochwave/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stochwave {

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::completed: return "completed";
    case StopReason::threshold: return "threshold";
    case StopReason::non_finite: return "non_finite";
  }
  return "unknown";
}

StopReason stop_reason_from_string(std::string_view s) {
  if (s == "completed") return StopReason::completed;
  if (s == "threshold") return StopReason::threshold;
  if (s == "non_finite") return StopReason::non_finite;
  throw std::invalid_argument("unknown stop reason '" + std::string(s) + "'");
}

void validate_config(const SimConfig& cfg) {
  validate_exponents(cfg.exponents);
  if (cfg.exponents.d != cfg.domain.dimension()) {
    throw std::invalid_argument("exponents.d does not match the domain dimension");
  }
  if (cfg.modes < 1) throw std::invalid_argument("modes must be >= 1");
  if (cfg.grid != 0 && cfg.grid < 2 * cfg.modes + 1) {
    throw std::invalid_argument("grid must be >= 2*modes+1 (got " + std::to_string(cfg.grid) + ")");
  }
  if (cfg.cutoff && !(cfg.cutoff->N > 0.0)) throw std::invalid_argument("cutoff must be > 0");
  if (cfg.yosida_lambda && !(*cfg.yosida_lambda > 0.0)) throw std::invalid_argument("yosida_lambda must be > 0");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw std::invalid_argument("horizon must be > 0");
  if (!(cfg.blowup_threshold > 0.0)) throw std::invalid_argument("blowup_threshold must be > 0");
  if (!std::isfinite(cfg.dt)) throw std::invalid_argument("dt must be finite");
}

namespace {

// Trapezoidal rule on the linear part, explicit nonlinear drift, additive noise:
//   a' = a + dt (b + b') / 2
//   b' = b - dt mu (a + a') / 2 + dt N + xi
// solved per mode in closed form; c = dt^2 mu / 4. The linear wave energy is conserved exactly.
void advance(Eigen::VectorXd& a, Eigen::VectorXd& b, const Eigen::VectorXd& mu, const Eigen::ArrayXd& c, double dt,
             const Eigen::VectorXd& nonlinear, const Eigen::VectorXd& xi) {
  const Eigen::VectorXd b_old = b;
  b = (((1.0 - c) * b.array() - dt * mu.array() * a.array() + dt * nonlinear.array() + xi.array()) / (1.0 + c))
          .matrix();
  a += 0.5 * dt * (b_old + b);
}

}  // namespace

struct GalerkinModel::Scratch {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Eigen::VectorXd rhs_grid;  // w * (source - damping)
  Eigen::VectorXd nonlinear;  // modal projection of source - damping
  double grad_sq = 0.0;
  double u_lp_p = 0.0;
  double v_lq_q = 0.0;
  double damping_work = 0.0;
  double source_work = 0.0;

  explicit Scratch(const SpectralBasis& b)
      : u(b.grid_size()), v(b.grid_size()), rhs_grid(b.grid_size()), nonlinear(b.size()) {}
};

GalerkinModel::GalerkinModel(SimConfig cfg)
    : cfg_(std::move(cfg)),
      basis_(cfg_.domain, cfg_.modes, cfg_.grid > 0 ? cfg_.grid : default_grid_size(cfg_.modes)) {
  validate_config(cfg_);
  validate_noise(cfg_.noise, basis_);

  const double mu_max = basis_.eigenvalues().maxCoeff();
  const double cap = 1.0 / std::sqrt(mu_max);
  double dt = cfg_.dt > 0.0 ? cfg_.dt : 0.25 * cap;
  steps_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(cfg_.horizon / dt - 1e-9)));
  dt_ = cfg_.horizon / static_cast<double>(steps_);
  if (dt_ > cap) {
    warnings_.push_back("dt = " + std::to_string(dt_) + " exceeds the stability cap 1/sqrt(mu_max) = " +
                        std::to_string(cap));
  }

  const GridField s0 = evaluate(cfg_.noise.sigma0, basis_);
  noise_map_ = basis_.projection_matrix() * s0.values.asDiagonal() * basis_.eval_matrix();
  galerkin_trace_ = 0.0;
  for (Eigen::Index i = 0; i < basis_.size(); ++i) {
    galerkin_trace_ += cfg_.noise.lambda[static_cast<std::size_t>(i)] * noise_map_.col(i).squaredNorm();
  }
}

ModalState GalerkinModel::initial_state() const {
  return ModalState{0.0, project(cfg_.u0, basis_), project(cfg_.u1, basis_)};
}

void GalerkinModel::nonlinear_terms(const ModalState& s, Scratch& w) const {
  const Eigen::MatrixXd& E = basis_.eval_matrix();
  const Eigen::VectorXd& wq = basis_.quad_weights();
  w.u.noalias() = E * s.a.coeffs;
  w.v.noalias() = E * s.b.coeffs;
  w.grad_sq = basis_.eigenvalues().dot(s.a.coeffs.cwiseAbs2());

  const double p = cfg_.exponents.p;
  const double q = cfg_.exponents.q;
  double chi = 1.0;
  if (cfg_.cutoff) chi = chi_cutoff(std::sqrt(w.grad_sq), cfg_.cutoff->N);

  double u_lp_p = 0.0;
  double v_lq_q = 0.0;
  double damping_work = 0.0;
  double source_work = 0.0;
  for (Eigen::Index k = 0; k < w.u.size(); ++k) {
    const double uk = w.u[k];
    const double vk = w.v[k];
    const double au = std::abs(uk);
    const double av = std::abs(vk);
    const double au_pm1 = abs_pow(uk, p - 1.0);
    const double av_qm1 = abs_pow(vk, q - 1.0);
    const double source = chi * std::copysign(au_pm1, uk);
    const double damping = cfg_.yosida_lambda ? g_yosida(vk, q, *cfg_.yosida_lambda) : std::copysign(av_qm1, vk);
    u_lp_p += wq[k] * au_pm1 * au;
    v_lq_q += wq[k] * av_qm1 * av;
    damping_work += wq[k] * damping * vk;
    source_work += wq[k] * source * vk;
    w.rhs_grid[k] = wq[k] * (source - damping);
  }
  w.nonlinear.noalias() = E.transpose() * w.rhs_grid;
  w.u_lp_p = u_lp_p;
  w.v_lq_q = v_lq_q;
  w.damping_work = damping_work;
  w.source_work = source_work;
}

EnergySnapshot GalerkinModel::energy(const ModalState& s) const {
  Scratch w(basis_);
  nonlinear_terms(s, w);
  const double v2 = s.b.coeffs.squaredNorm();
  const double p = cfg_.exponents.p;
  return EnergySnapshot{v2 + w.grad_sq + 2.0 / p * w.u_lp_p, 0.5 * v2 + 0.5 * w.grad_sq - w.u_lp_p / p};
}

std::pair<ModalVector, ModalVector> GalerkinModel::drift(const ModalState& s) const {
  Scratch w(basis_);
  nonlinear_terms(s, w);
  ModalVector db(w.nonlinear - basis_.eigenvalues().cwiseProduct(s.a.coeffs));
  return {s.b, std::move(db)};
}

ModalState GalerkinModel::step(const ModalState& s, const ModalVector& forcing) const {
  Scratch w(basis_);
  nonlinear_terms(s, w);
  const Eigen::VectorXd& mu = basis_.eigenvalues();
  ModalState next = s;
  next.t = s.t + dt_;
  const Eigen::ArrayXd c = 0.25 * dt_ * dt_ * mu.array();
  advance(next.a.coeffs, next.b.coeffs, mu, c, dt_, w.nonlinear, forcing.coeffs);
  return next;
}

ModalVector GalerkinModel::forcing(const NoiseStream& stream, std::int64_t k) const {
  const NoiseSpec& ns = cfg_.noise;
  if (ns.eps == 0.0) return ModalVector::zero(basis_.size());
  const WienerIncrement inc = stream.increment(ns, dt_, static_cast<std::uint64_t>(k));
  const double amp = ns.eps * std::exp(-ns.kappa * static_cast<double>(k) * dt_);
  return ModalVector(amp * (noise_map_ * inc.dW));
}

double GalerkinModel::ito_rate(double t) const {
  const NoiseSpec& ns = cfg_.noise;
  return ns.eps * ns.eps * galerkin_trace_ * std::exp(-2.0 * ns.kappa * t);
}

TrajectoryRecord GalerkinModel::simulate_path(std::uint64_t seed, int record_stride) const {
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.rows.reserve(static_cast<std::size_t>(steps_ / record_stride + 2));

  const NoiseStream stream(seed);
  const Eigen::VectorXd& mu = basis_.eigenvalues();
  const Eigen::ArrayXd c = 0.25 * dt_ * dt_ * mu.array();
  const double p = cfg_.exponents.p;

  ModalState s = initial_state();
  Scratch w(basis_);
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(basis_.size());
  TrajectoryRow acc;  // running integrals

  for (std::int64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt_;
    const bool finite = s.a.coeffs.allFinite() && s.b.coeffs.allFinite();
    if (finite) nonlinear_terms(s, w);
    const bool all_finite = finite && std::isfinite(w.u_lp_p) && std::isfinite(w.v_lq_q) &&
                            std::isfinite(w.damping_work) && std::isfinite(w.source_work) && w.nonlinear.allFinite();
    if (!all_finite) {
      rec.stop = StopInfo{StopReason::non_finite, t, k};
      break;
    }

    const double v2 = s.b.coeffs.squaredNorm();
    const double e_val = v2 + w.grad_sq + 2.0 / p * w.u_lp_p;
    rec.sup_e = std::max(rec.sup_e, e_val);

    const bool crossed = std::sqrt(w.grad_sq) >= cfg_.blowup_threshold;
    const bool last = k == steps_;
    if (k % record_stride == 0 || last || crossed) {
      TrajectoryRow row = acc;
      row.step = k;
      row.t = t;
      row.v_l2_sq = v2;
      row.grad_u_sq = w.grad_sq;
      row.u_lp_p = w.u_lp_p;
      row.v_lq_q = w.v_lq_q;
      row.u_dot_v = s.a.coeffs.dot(s.b.coeffs);
      row.e_energy = e_val;
      row.calE = 0.5 * v2 + 0.5 * w.grad_sq - w.u_lp_p / p;
      rec.rows.push_back(row);
    }
    if (crossed) {
      rec.stop = StopInfo{StopReason::threshold, t, k};
      break;
    }
    if (last) {
      rec.stop = StopInfo{StopReason::completed, t, k};
      break;
    }

    if (cfg_.noise.eps != 0.0) {
      xi = forcing(stream, k).coeffs;
      acc.stoch_int += s.b.coeffs.dot(xi);
      acc.noise_qv += xi.squaredNorm();
      acc.ito_corr_int += ito_rate(t) * dt_;
    }
    acc.damping_int += dt_ * w.damping_work;
    acc.source_work_int += dt_ * w.source_work;

    advance(s.a.coeffs, s.b.coeffs, mu, c, dt_, w.nonlinear, xi);
    s.t = static_cast<double>(k + 1) * dt_;
  }
  return rec;
}

std::pair<ModalVector, ModalVector> drift(const ModalState& s, const GalerkinModel& model) { return model.drift(s); }

ModalState step(const ModalState& s, const GalerkinModel& model, const NoiseStream& stream, std::int64_t k) {
  return model.step(s, model.forcing(stream, k));
}

TrajectoryRecord simulate_path(const SimConfig& cfg, std::uint64_t seed, int record_stride) {
  return GalerkinModel(cfg).simulate_path(seed, record_stride);
}

std::vector<double> energy_identity_residual(const TrajectoryRecord& rec) {
  std::vector<double> res;
  if (rec.rows.empty()) return res;
  res.reserve(rec.rows.size());
  const TrajectoryRow& r0 = rec.rows.front();
  const double initial = r0.grad_u_sq + r0.v_l2_sq;
  for (const TrajectoryRow& r : rec.rows) {
    const double lhs = r.grad_u_sq + r.v_l2_sq + 2.0 * r.damping_int - 2.0 * r.source_work_int;
    const double rhs = initial + 2.0 * r.stoch_int + r.ito_corr_int;
    res.push_back(lhs - rhs);
  }
  return res;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::optional<double> stopping_time(const TrajectoryRecord& rec, double threshold) {
  for (const TrajectoryRow& r : rec.rows) {
    if (std::sqrt(r.grad_u_sq) >= threshold) return r.t;
  }
  return std::nullopt;
}

}  // namespace stochwave
