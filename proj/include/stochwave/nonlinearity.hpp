#pragma once

#include "stochwave/spectral_basis.hpp"

namespace stochwave {

/// Damping exponent q, source exponent p and space dimension d.
struct Exponents {
  double q = 2.0;
  double p = 4.0;
  int d = 1;
};

/// Throws std::invalid_argument unless q >= 2, p > 2 and, for d >= 3,
/// max(p, q) <= 2(d-1)/(d-2) (the H^1_0 embedding condition).
void validate_exponents(const Exponents& e);

/// Truncation threshold N > 0 on ||grad u||_2.
struct CutoffLevel {
  double N = 1.0;
};

/// |x|^p, with exact multiplication for the common integer exponents.
double abs_pow(double x, double p);

/// g(x) = |x|^(q-2) x.
double g_pow(double x, double q);

/// Unique y with y + lambda |y|^(q-2) y = x. Safeguarded Newton on the bracket
/// [0, |x|], iterated to a few ulp of |y|.
/// Throws std::runtime_error if 200 iterations do not converge.
double resolvent(double x, double q, double lambda);

/// Yosida approximation g_lambda(x) = g((I + lambda g)^-1 x).
double g_yosida(double x, double q, double lambda);

/// The same map through its difference form (x - (I + lambda g)^-1 x) / lambda.
double g_yosida_difference_form(double x, double q, double lambda);

/// C^1 cutoff: 1 on (-inf, N], 0 on [N+1, inf), smoothstep 1 - 3s^2 + 2s^3 on s = x - N in between.
/// |chi'| peaks at 1.5.
double chi_cutoff(double x, double N);
double chi_cutoff_derivative(double x, double N);

/// f(u) = |u|^(p-2) u pointwise.
GridField f_source(const GridField& u, double p);

/// f_N(u) = chi_N(grad_norm) |u|^(p-2) u pointwise. grad_norm is ||grad u||_2 of u.
GridField f_truncated(const GridField& u, double grad_norm, double p, CutoffLevel N);

/// (g(a) - g(b)) (a - b) >= 0.
double damping_gap(double a, double b, double q);

}  // namespace stochwave
