#include "stochwave/spectral_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stochwave {

namespace {

constexpr double kPi = std::numbers::pi;

void require_length(double len, const char* what) {
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw std::invalid_argument(std::string("domain length ") + what + " must be positive and finite");
  }
}

void require_size(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(got) +
                                " does not match basis (" + std::to_string(want) + ")");
  }
}

}  // namespace

Domain Domain::interval(double length) {
  require_length(length, "L");
  return Domain{Kind::interval, length, 0.0};
}

Domain Domain::rectangle(double lx, double ly) {
  require_length(lx, "Lx");
  require_length(ly, "Ly");
  return Domain{Kind::rectangle, lx, ly};
}

SpectralBasis::SpectralBasis(const Domain& domain, int modes_per_axis, int grid_per_axis)
    : domain_(domain), modes_per_axis_(modes_per_axis), grid_per_axis_(grid_per_axis) {
  if (modes_per_axis < 1) {
    throw std::invalid_argument("mode count must be >= 1");
  }
  if (grid_per_axis < 2 * modes_per_axis + 1) {
    throw std::invalid_argument("grid size " + std::to_string(grid_per_axis) +
                                " too small for " + std::to_string(modes_per_axis) +
                                " modes (need n >= 2m+1)");
  }
  if (domain.kind == Domain::Kind::interval) {
    require_length(domain.lx, "L");
  } else {
    require_length(domain.lx, "Lx");
    require_length(domain.ly, "Ly");
  }

  const int m = modes_per_axis;
  const int n = grid_per_axis;
  const double hx = domain.lx / (n + 1);

  if (domain.kind == Domain::Kind::interval) {
    modes_.reserve(m);
    for (int i = 1; i <= m; ++i) modes_.push_back({i, 0});
    points_.reserve(n);
    for (int k = 1; k <= n; ++k) points_.push_back({k * hx, 0.0});
    weights_ = Eigen::VectorXd::Constant(n, hx);
  } else {
    const double hy = domain.ly / (n + 1);
    modes_.reserve(static_cast<std::size_t>(m) * m);
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= m; ++j) modes_.push_back({i, j});
    auto mu_of = [&](const ModeIndex& mi) {
      const double kx = mi.i * kPi / domain.lx;
      const double ky = mi.j * kPi / domain.ly;
      return kx * kx + ky * ky;
    };
    std::stable_sort(modes_.begin(), modes_.end(),
                     [&](const ModeIndex& a, const ModeIndex& b) { return mu_of(a) < mu_of(b); });
    points_.reserve(static_cast<std::size_t>(n) * n);
    for (int kx = 1; kx <= n; ++kx)
      for (int ky = 1; ky <= n; ++ky) points_.push_back({kx * hx, ky * hy});
    weights_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n) * n, hx * hy);
  }

  const auto nm = static_cast<Eigen::Index>(modes_.size());
  mu_.resize(nm);
  for (Eigen::Index k = 0; k < nm; ++k) {
    const double kx = modes_[k].i * kPi / domain.lx;
    double val = kx * kx;
    if (domain.kind == Domain::Kind::rectangle) {
      const double ky = modes_[k].j * kPi / domain.ly;
      val += ky * ky;
    }
    mu_[k] = val;
  }

  const auto ng = static_cast<Eigen::Index>(points_.size());
  eval_.resize(ng, nm);
  for (Eigen::Index j = 0; j < nm; ++j)
    for (Eigen::Index k = 0; k < ng; ++k) eval_(k, j) = eigenfunction(j, points_[k][0], points_[k][1]);
  proj_ = eval_.transpose() * weights_.asDiagonal();
}

double SpectralBasis::sup_norm_bound() const {
  if (domain_.kind == Domain::Kind::interval) return std::sqrt(2.0 / domain_.lx);
  return 2.0 / std::sqrt(domain_.lx * domain_.ly);
}

double SpectralBasis::eigenfunction(Eigen::Index mode, double x, double y) const {
  const ModeIndex& mi = modes_[mode];
  const double sx = std::sin(mi.i * kPi * x / domain_.lx);
  if (domain_.kind == Domain::Kind::interval) return std::sqrt(2.0 / domain_.lx) * sx;
  const double sy = std::sin(mi.j * kPi * y / domain_.ly);
  return sup_norm_bound() * sx * sy;
}

std::array<double, 2> SpectralBasis::eigenfunction_gradient(Eigen::Index mode, double x, double y) const {
  const ModeIndex& mi = modes_[mode];
  const double kx = mi.i * kPi / domain_.lx;
  if (domain_.kind == Domain::Kind::interval) {
    return {std::sqrt(2.0 / domain_.lx) * kx * std::cos(kx * x), 0.0};
  }
  const double ky = mi.j * kPi / domain_.ly;
  const double c0 = sup_norm_bound();
  return {c0 * kx * std::cos(kx * x) * std::sin(ky * y), c0 * ky * std::sin(kx * x) * std::cos(ky * y)};
}

SpectralBasis build_basis(const Domain& domain, int m, int n) { return SpectralBasis(domain, m, n); }

int default_grid_size(int m) { return 4 * m + 1; }

GridField to_grid(const ModalVector& c, const SpectralBasis& b) {
  require_size(c.size(), b.size(), "to_grid");
  return GridField(b.eval_matrix() * c.coeffs);
}

ModalVector to_coeffs(const GridField& f, const SpectralBasis& b) {
  require_size(f.size(), b.grid_size(), "to_coeffs");
  return ModalVector(b.projection_matrix() * f.values);
}

double l2_norm_sq(const ModalVector& c) { return c.coeffs.squaredNorm(); }

double h1_seminorm_sq(const ModalVector& c, const SpectralBasis& b) {
  require_size(c.size(), b.size(), "h1_seminorm_sq");
  return b.eigenvalues().dot(c.coeffs.cwiseAbs2());
}

double h1_seminorm_sq_quadrature(const ModalVector& c, const SpectralBasis& b) {
  require_size(c.size(), b.size(), "h1_seminorm_sq_quadrature");
  const Domain& dom = b.domain();
  const int n = b.grid_per_axis();
  // Closed grid k = 0..n+1; endpoint weights are halved.
  auto trap_weight = [n](int k, double h) { return (k == 0 || k == n + 1) ? 0.5 * h : h; };
  const double hx = dom.lx / (n + 1);
  double total = 0.0;
  if (dom.kind == Domain::Kind::interval) {
    for (int k = 0; k <= n + 1; ++k) {
      double gx = 0.0;
      for (Eigen::Index j = 0; j < b.size(); ++j) gx += c[j] * b.eigenfunction_gradient(j, k * hx)[0];
      total += trap_weight(k, hx) * gx * gx;
    }
    return total;
  }
  const double hy = dom.ly / (n + 1);
  for (int kx = 0; kx <= n + 1; ++kx) {
    for (int ky = 0; ky <= n + 1; ++ky) {
      double gx = 0.0;
      double gy = 0.0;
      for (Eigen::Index j = 0; j < b.size(); ++j) {
        const auto g = b.eigenfunction_gradient(j, kx * hx, ky * hy);
        gx += c[j] * g[0];
        gy += c[j] * g[1];
      }
      total += trap_weight(kx, hx) * trap_weight(ky, hy) * (gx * gx + gy * gy);
    }
  }
  return total;
}

double lp_norm_pow(const GridField& f, double p, const SpectralBasis& b) {
  require_size(f.size(), b.grid_size(), "lp_norm_pow");
  if (!(p > 1.0)) throw std::invalid_argument("lp_norm_pow: p must be > 1");
  if (!f.values.allFinite()) throw std::domain_error("lp_norm_pow: non-finite field values");
  const Eigen::VectorXd& w = b.quad_weights();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) acc += w[k] * std::pow(std::abs(f[k]), p);
  return acc;
}

GridField evaluate(const FieldProfile& profile, const SpectralBasis& b) {
  const Eigen::Index ng = b.grid_size();
  switch (profile.kind) {
    case FieldProfile::Kind::zero:
      return GridField(Eigen::VectorXd::Zero(ng));
    case FieldProfile::Kind::constant:
      return GridField(Eigen::VectorXd::Constant(ng, profile.value));
    case FieldProfile::Kind::sine: {
      const Domain& dom = b.domain();
      Eigen::VectorXd v(ng);
      for (Eigen::Index k = 0; k < ng; ++k) {
        const auto& pt = b.grid_points()[static_cast<std::size_t>(k)];
        double s = std::sin(kPi * pt[0] / dom.lx);
        if (dom.kind == Domain::Kind::rectangle) s *= std::sin(kPi * pt[1] / dom.ly);
        v[k] = profile.value * s;
      }
      return GridField(std::move(v));
    }
    case FieldProfile::Kind::modes:
      return to_grid(project(profile, b), b);
  }
  throw std::logic_error("unhandled FieldProfile kind");
}

ModalVector project(const FieldProfile& profile, const SpectralBasis& b) {
  if (profile.kind == FieldProfile::Kind::modes) {
    if (static_cast<Eigen::Index>(profile.coeffs.size()) > b.size()) {
      throw std::invalid_argument("modal profile has " + std::to_string(profile.coeffs.size()) +
                                  " coefficients but the basis has " + std::to_string(b.size()) + " modes");
    }
    ModalVector c = ModalVector::zero(b.size());
    for (std::size_t k = 0; k < profile.coeffs.size(); ++k) c[static_cast<Eigen::Index>(k)] = profile.coeffs[k];
    return c;
  }
  if (profile.kind == FieldProfile::Kind::zero) return ModalVector::zero(b.size());
  return to_coeffs(evaluate(profile, b), b);
}

}  // namespace stochwave
