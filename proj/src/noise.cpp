#include "stochwave/noise.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stochwave {

double NoiseSpec::trace() const {
  double s = 0.0;
  for (double l : lambda) s += l;
  return s;
}

void validate_noise(const NoiseSpec& spec, const SpectralBasis& b) {
  if (static_cast<Eigen::Index>(spec.lambda.size()) != b.size()) {
    throw std::invalid_argument("noise spectrum has " + std::to_string(spec.lambda.size()) +
                                " eigenvalues but the basis has " + std::to_string(b.size()) + " modes");
  }
  for (double l : spec.lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw std::invalid_argument("covariance eigenvalues must be finite and >= 0");
  }
  if (!(spec.eps >= 0.0)) throw std::invalid_argument("noise strength eps must be >= 0");
  if (!(spec.kappa >= 0.0)) throw std::invalid_argument("sigma decay rate kappa must be >= 0");
}

std::vector<double> make_spectrum(const SpectralBasis& b, double gamma, double lambda0) {
  if (!(lambda0 > 0.0)) throw std::invalid_argument("make_spectrum: lambda0 must be positive");
  std::vector<double> out(static_cast<std::size_t>(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i) out[static_cast<std::size_t>(i)] = lambda0 * std::pow(b.eigenvalues()[i], -gamma);
  return out;
}

bool spectrum_summable(double gamma, int dimension) { return gamma > 0.5 * dimension; }

GridField sigma_field(const NoiseSpec& spec, double t, const SpectralBasis& b) {
  GridField s = evaluate(spec.sigma0, b);
  if (spec.kappa != 0.0) s.values *= std::exp(-spec.kappa * t);
  return s;
}

ModalVector forcing_coeffs(const NoiseSpec& spec, const WienerIncrement& inc, double t, const SpectralBasis& b) {
  if (inc.dW.size() != b.size()) throw std::invalid_argument("forcing_coeffs: increment does not match basis");
  if (spec.eps == 0.0) return ModalVector::zero(b.size());
  GridField w = to_grid(ModalVector(inc.dW), b);
  const GridField s = sigma_field(spec, t, b);
  w.values = (spec.eps * s.values.array() * w.values.array()).matrix();
  return to_coeffs(w, b);
}

double noise_trace(const NoiseSpec& spec, const SpectralBasis& b, NoiseTrace kind) {
  validate_noise(spec, b);
  const GridField s0 = evaluate(spec.sigma0, b);
  const Eigen::MatrixXd& E = b.eval_matrix();
  double total = 0.0;
  if (kind == NoiseTrace::continuous) {
    const Eigen::VectorXd w_s2 = b.quad_weights().cwiseProduct(s0.values.cwiseAbs2());
    for (Eigen::Index i = 0; i < b.size(); ++i) total += spec.lambda[static_cast<std::size_t>(i)] * w_s2.dot(E.col(i).cwiseAbs2());
    return total;
  }
  // Column i holds the modal coefficients of sigma0 * e_i.
  const Eigen::MatrixXd S = b.projection_matrix() * s0.values.asDiagonal() * E;
  for (Eigen::Index i = 0; i < b.size(); ++i) total += spec.lambda[static_cast<std::size_t>(i)] * S.col(i).squaredNorm();
  return total;
}

double injected_energy(const NoiseSpec& spec, double t, const SpectralBasis& b, NoiseTrace kind) {
  if (!(t >= 0.0)) throw std::invalid_argument("injected_energy: t must be >= 0");
  if (spec.eps == 0.0 || t == 0.0) return 0.0;
  double time_factor = 0.0;
  if (spec.kappa > 0.0) {
    time_factor = std::isinf(t) ? 1.0 / (2.0 * spec.kappa) : -std::expm1(-2.0 * spec.kappa * t) / (2.0 * spec.kappa);
  } else {
    if (std::isinf(t)) throw std::domain_error("injected_energy: F(inf) diverges for kappa = 0");
    time_factor = t;
  }
  return 0.5 * spec.eps * spec.eps * noise_trace(spec, b, kind) * time_factor;
}

E1Bound e1_bound(const NoiseSpec& spec, const SpectralBasis& b) {
  if (!(spec.kappa > 0.0)) {
    throw std::domain_error("E1 requires kappa > 0 so that sigma is square integrable over (0, inf)");
  }
  E1Bound out;
  out.exact = injected_energy(spec, std::numeric_limits<double>::infinity(), b, NoiseTrace::continuous);
  const double c0 = b.sup_norm_bound();
  const double sigma_sq_int = lp_norm_pow(evaluate(spec.sigma0, b), 2.0, b) / (2.0 * spec.kappa);
  out.coarse = 0.5 * spec.eps * spec.eps * c0 * c0 * spec.trace() * sigma_sq_int;
  if (out.exact > out.coarse * (1.0 + 1e-12) + 1e-300) {
    throw std::logic_error("E1 exceeds its coarse bound; sigma0 or spectrum is inconsistent");
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (0x632be59bd9b4e019ULL + (b << 6) + (b >> 2)));
  const std::uint64_t x = g();
  SplitMix64 h(x ^ b);
  return h();
}

}  // namespace stochwave
