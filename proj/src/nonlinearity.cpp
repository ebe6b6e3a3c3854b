#include "stochwave/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stochwave {

void validate_exponents(const Exponents& e) {
  if (!(e.q >= 2.0)) {
    throw std::invalid_argument("damping exponent q must satisfy q >= 2 (got " + std::to_string(e.q) + ")");
  }
  if (!(e.p > 2.0)) {
    throw std::invalid_argument("source exponent p must satisfy p > 2 (got " + std::to_string(e.p) + ")");
  }
  if (e.d < 1) throw std::invalid_argument("dimension must be >= 1");
  if (e.d >= 3) {
    const double cap = 2.0 * (e.d - 1) / (e.d - 2);
    if (std::max(e.p, e.q) > cap) {
      throw std::invalid_argument("max(p, q) must not exceed 2(d-1)/(d-2) = " + std::to_string(cap) +
                                  " in dimension " + std::to_string(e.d));
    }
  }
}

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  if (p == 4.0) {
    const double a2 = a * a;
    return a2 * a2;
  }
  if (p == 1.0) return a;
  return std::pow(a, p);
}

double g_pow(double x, double q) {
  if (q == 2.0) return x;
  return std::copysign(abs_pow(x, q - 1.0), x);
}

double resolvent(double x, double q, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("resolvent: lambda must be positive");
  if (x == 0.0) return 0.0;
  if (q == 2.0) return x / (1.0 + lambda);

  // Odd map: solve for |x| and restore the sign.
  const double target = std::abs(x);
  auto phi = [&](double y) { return y + lambda * abs_pow(y, q - 1.0) - target; };
  auto dphi = [&](double y) { return 1.0 + lambda * (q - 1.0) * abs_pow(y, q - 2.0); };

  double lo = 0.0;
  double hi = target;
  // One bisection step keeps Newton away from y = 0, where |y|^(q-2) has an unbounded slope for q < 3.
  double y = 0.5 * (lo + hi);
  if (phi(y) > 0.0) hi = y; else lo = y;
  y = hi;

  for (int it = 0; it < 200; ++it) {
    const double f = phi(y);
    if (f > 0.0) hi = y; else lo = y;
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(y, std::numeric_limits<double>::min());
    double next = y - f / dphi(y);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - y) <= tol || hi - lo <= tol) return std::copysign(next, x);
    y = next;
  }
  throw std::runtime_error("resolvent: no convergence after 200 iterations");
}

double g_yosida(double x, double q, double lambda) { return g_pow(resolvent(x, q, lambda), q); }

double g_yosida_difference_form(double x, double q, double lambda) {
  return (x - resolvent(x, q, lambda)) / lambda;
}

double chi_cutoff(double x, double N) {
  if (x <= N) return 1.0;
  if (x >= N + 1.0) return 0.0;
  const double s = x - N;
  return 1.0 - 3.0 * s * s + 2.0 * s * s * s;
}

double chi_cutoff_derivative(double x, double N) {
  if (x <= N || x >= N + 1.0) return 0.0;
  const double s = x - N;
  return -6.0 * s + 6.0 * s * s;
}

GridField f_source(const GridField& u, double p) {
  GridField out(Eigen::VectorXd(u.size()));
  for (Eigen::Index k = 0; k < u.size(); ++k) out[k] = g_pow(u[k], p);
  return out;
}

GridField f_truncated(const GridField& u, double grad_norm, double p, CutoffLevel N) {
  if (!std::isfinite(grad_norm) || !u.values.allFinite()) {
    throw std::domain_error("f_truncated: non-finite input");
  }
  const double chi = chi_cutoff(grad_norm, N.N);
  if (chi == 0.0) return GridField(Eigen::VectorXd::Zero(u.size()));
  GridField out = f_source(u, p);
  if (chi != 1.0) out.values *= chi;
  return out;
}

double damping_gap(double a, double b, double q) { return (g_pow(a, q) - g_pow(b, q)) * (a - b); }

}  // namespace stochwave
