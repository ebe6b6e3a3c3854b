#pragma once

#include "stochwave/spectral_basis.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace stochwave {

/// Additive noise eps * sigma(x,t) dW with W = sum_i sqrt(lambda_i) B_i e_i and the
/// separable amplitude sigma(x,t) = sigma0(x) exp(-kappa t).
struct NoiseSpec {
  std::vector<double> lambda;  // covariance eigenvalues, one per basis mode
  double eps = 0.0;
  FieldProfile sigma0 = FieldProfile::constant(1.0);
  double kappa = 0.0;

  double trace() const;
};

/// Throws std::invalid_argument on negative eigenvalues, eps < 0, kappa < 0 or a
/// spectrum whose length differs from the basis.
void validate_noise(const NoiseSpec& spec, const SpectralBasis& b);

/// lambda_i = lambda0 * mu_i^-gamma. Throws for lambda0 <= 0.
std::vector<double> make_spectrum(const SpectralBasis& b, double gamma, double lambda0);

/// The untruncated spectrum mu^-gamma is summable iff gamma > d/2.
bool spectrum_summable(double gamma, int dimension);

/// Entries sqrt(lambda_i) * sqrt(dt) * xi_i of a Q-Wiener increment.
struct WienerIncrement {
  Eigen::VectorXd dW;
};

/// Draws one increment from `rng`. Zero (without consuming rng) when eps == 0.
template <class Rng>
WienerIncrement wiener_increment(const NoiseSpec& spec, double dt, Rng& rng) {
  WienerIncrement inc{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.lambda.size()))};
  if (spec.eps == 0.0) return inc;
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sdt = std::sqrt(dt);
  for (std::size_t i = 0; i < spec.lambda.size(); ++i) {
    const double xi = normal(rng);
    inc.dW[static_cast<Eigen::Index>(i)] = std::sqrt(spec.lambda[i]) * sdt * xi;
  }
  return inc;
}

/// sigma0(x) exp(-kappa t) on the grid.
GridField sigma_field(const NoiseSpec& spec, double t, const SpectralBasis& b);

/// Modal coefficients of eps * sigma(x,t) * sum_i dW_i e_i(x): the grid field of the
/// sum is multiplied pointwise by eps * sigma and projected.
ModalVector forcing_coeffs(const NoiseSpec& spec, const WienerIncrement& inc, double t, const SpectralBasis& b);

/// Which spatial trace enters the injected-energy functional.
enum class NoiseTrace {
  /// sum_i lambda_i int e_i^2 sigma0^2 dx (the untruncated functional)
  continuous,
  /// sum_i lambda_i ||P_m(sigma0 e_i)||^2 (the quadratic variation of the Galerkin noise)
  galerkin,
};

double noise_trace(const NoiseSpec& spec, const SpectralBasis& b, NoiseTrace kind);

/// F(t) = 1/2 eps^2 sum_i lambda_i int_0^t int_D e_i^2 sigma^2 dx ds, closed form in time.
/// t may be +inf when kappa > 0; throws std::domain_error for t = inf with kappa == 0.
double injected_energy(const NoiseSpec& spec, double t, const SpectralBasis& b,
                       NoiseTrace kind = NoiseTrace::continuous);

struct E1Bound {
  double exact = 0.0;   // F(inf)
  double coarse = 0.0;  // 1/2 eps^2 c0^2 TrR int_0^inf int_D sigma^2
};

/// Throws std::domain_error for kappa <= 0 (sigma not square integrable in time) and
/// std::logic_error if the exact value exceeds the coarse bound.
E1Bound e1_bound(const NoiseSpec& spec, const SpectralBasis& b);

/// SplitMix64: tiny counter-friendly generator used for per-(path, step) streams.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Mixes two words into a well-scrambled seed.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Increment stream of one path: step k always draws from a generator keyed by
/// (path_seed, k), so streams do not depend on call order.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t path_seed) : seed_(path_seed) {}

  WienerIncrement increment(const NoiseSpec& spec, double dt, std::uint64_t step) const {
    SplitMix64 gen(mix_seed(seed_, step));
    return wiener_increment(spec, dt, gen);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace stochwave
