#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace stochwave {

/// Bounded domain: an interval (0, L) or a rectangle (0, Lx) x (0, Ly).
struct Domain {
  enum class Kind { interval, rectangle };

  Kind kind = Kind::interval;
  double lx = 1.0;
  double ly = 0.0;  // unused for intervals

  static Domain interval(double length);
  static Domain rectangle(double lx, double ly);

  int dimension() const { return kind == Kind::interval ? 1 : 2; }
  double measure() const { return kind == Kind::interval ? lx : lx * ly; }
};

/// Coefficients of a field in the eigenbasis, ordered like SpectralBasis::modes().
struct ModalVector {
  Eigen::VectorXd coeffs;

  ModalVector() = default;
  explicit ModalVector(Eigen::VectorXd c) : coeffs(std::move(c)) {}
  static ModalVector zero(Eigen::Index size) { return ModalVector(Eigen::VectorXd::Zero(size)); }

  Eigen::Index size() const { return coeffs.size(); }
  double operator[](Eigen::Index i) const { return coeffs[i]; }
  double& operator[](Eigen::Index i) { return coeffs[i]; }
};

/// Point values on the collocation grid of a basis (row-major in x for rectangles).
struct GridField {
  Eigen::VectorXd values;

  GridField() = default;
  explicit GridField(Eigen::VectorXd v) : values(std::move(v)) {}

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double& operator[](Eigen::Index i) { return values[i]; }
};

/// Mode (i, j) with sine wavenumbers i, j >= 1; j == 0 on an interval.
struct ModeIndex {
  int i = 1;
  int j = 0;
};

/// Dirichlet eigenpairs of -Laplace on an interval or rectangle, L2-normalized,
/// together with a uniform interior grid and its trapezoid weights.
///
/// Interval: e_i(x) = sqrt(2/L) sin(i pi x / L), mu_i = (i pi / L)^2.
/// Rectangle: tensor products, sorted by ascending eigenvalue.
///
/// Grid nodes are x_k = k L / (n + 1), k = 1..n. Fields vanish on the boundary,
/// so the composite trapezoid rule reduces to equal weights h = L / (n + 1).
class SpectralBasis {
 public:
  SpectralBasis(const Domain& domain, int modes_per_axis, int grid_per_axis);

  const Domain& domain() const { return domain_; }
  Eigen::Index size() const { return mu_.size(); }
  Eigen::Index grid_size() const { return weights_.size(); }
  int modes_per_axis() const { return modes_per_axis_; }
  int grid_per_axis() const { return grid_per_axis_; }

  const Eigen::VectorXd& eigenvalues() const { return mu_; }
  const std::vector<ModeIndex>& modes() const { return modes_; }
  const Eigen::VectorXd& quad_weights() const { return weights_; }
  const std::vector<std::array<double, 2>>& grid_points() const { return points_; }

  /// grid_size x size matrix with entries e_j(x_k).
  const Eigen::MatrixXd& eval_matrix() const { return eval_; }
  /// size x grid_size matrix with entries w_k e_j(x_k).
  const Eigen::MatrixXd& projection_matrix() const { return proj_; }

  /// c0 = sup_i ||e_i||_inf.
  double sup_norm_bound() const;

  double eigenfunction(Eigen::Index mode, double x, double y = 0.0) const;
  std::array<double, 2> eigenfunction_gradient(Eigen::Index mode, double x, double y = 0.0) const;

 private:
  Domain domain_;
  int modes_per_axis_;
  int grid_per_axis_;
  std::vector<ModeIndex> modes_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd weights_;
  std::vector<std::array<double, 2>> points_;
  Eigen::MatrixXd eval_;
  Eigen::MatrixXd proj_;
};

/// Builds the basis. `m` and `n` are per axis; a rectangle gets m*m modes on an n*n grid.
/// Throws std::invalid_argument for m < 1, n < 2m + 1 or non-positive lengths.
SpectralBasis build_basis(const Domain& domain, int m, int n);

/// Default oversampled grid size 4m + 1, used for the nonlinear terms.
int default_grid_size(int m);

GridField to_grid(const ModalVector& c, const SpectralBasis& b);
ModalVector to_coeffs(const GridField& f, const SpectralBasis& b);

double l2_norm_sq(const ModalVector& c);
/// ||grad u||^2 = sum_j mu_j c_j^2.
double h1_seminorm_sq(const ModalVector& c, const SpectralBasis& b);
/// ||grad u||^2 by trapezoid quadrature of the analytically differentiated expansion,
/// on the grid extended with its boundary nodes. Independent of the Parseval route.
double h1_seminorm_sq_quadrature(const ModalVector& c, const SpectralBasis& b);
/// Quadrature of int |f|^p.
double lp_norm_pow(const GridField& f, double p, const SpectralBasis& b);

/// Closed-form field descriptions used for initial data and the noise amplitude.
struct FieldProfile {
  enum class Kind { zero, constant, sine, modes };

  Kind kind = Kind::zero;
  double value = 0.0;         // constant value or sine amplitude
  std::vector<double> coeffs;  // modal coefficients, zero-padded to the basis size

  static FieldProfile zero() { return {}; }
  static FieldProfile constant(double v) { return {Kind::constant, v, {}}; }
  /// value * sin(pi x / Lx) [* sin(pi y / Ly)]
  static FieldProfile sine(double amplitude) { return {Kind::sine, amplitude, {}}; }
  static FieldProfile modal(std::vector<double> c) { return {Kind::modes, 0.0, std::move(c)}; }
};

GridField evaluate(const FieldProfile& profile, const SpectralBasis& b);
ModalVector project(const FieldProfile& profile, const SpectralBasis& b);

}  // namespace stochwave
