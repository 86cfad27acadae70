#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "halfline/weighted_space.hpp"

namespace halfline::ops {

/// Real diagonalization A = -S diag(kappa) S^{-1}; kappa are the eigenvalues
/// of -A. For the Dirichlet Laplacian S = diag(scaling) * U with U orthogonal,
/// so every spectral function is assembled without inverting a dense matrix.
struct SpectralFactor {
  Eigen::VectorXd kappa;       // ascending
  Eigen::MatrixXd basis;       // S
  Eigen::MatrixXd basis_inv;   // S^{-1}
  Eigen::MatrixXd orthonormal; // U, empty for a general factor
  Eigen::VectorXd scaling;     // diag of the similarity, empty for a general factor

  Eigen::Index size() const { return kappa.size(); }

  // S diag(f(kappa)) S^{-1}
  Eigen::MatrixXd function(const std::function<double(double)>& f) const;
  // S diag(f(kappa)) S^{-1} v without forming the matrix.
  Eigen::VectorXd apply_function(const std::function<double(double)>& f,
                                 const Eigen::VectorXd& v) const;
  // Transposed action: S^{-T} diag(f(kappa)) S^T v.
  Eigen::VectorXd apply_function_transposed(const std::function<double(double)>& f,
                                            const Eigen::VectorXd& v) const;
};

/// Dense operator in orthonormalized coordinates of a grid: the weighted
/// adjoint is the matrix transpose.
class LinOp {
 public:
  LinOp() = default;
  LinOp(Eigen::MatrixXd matrix, std::uint64_t grid_id,
        std::shared_ptr<const SpectralFactor> spectral = nullptr);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  std::uint64_t grid_id() const { return grid_id_; }
  Eigen::Index size() const { return matrix_.rows(); }
  bool has_spectral() const { return spectral_ != nullptr; }
  // Throws NumericError when the operator carries no factorization.
  const SpectralFactor& spectral() const;
  std::shared_ptr<const SpectralFactor> spectral_ptr() const { return spectral_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& ortho) const;
  LinOp adjoint() const;

  static LinOp identity(Eigen::Index n, std::uint64_t grid_id);
  static LinOp zero(Eigen::Index n, std::uint64_t grid_id);

 private:
  Eigen::MatrixXd matrix_;
  std::uint64_t grid_id_ = 0;
  std::shared_ptr<const SpectralFactor> spectral_;
};

// Composition; both operands must act on the same grid.
LinOp operator*(const LinOp& lhs, const LinOp& rhs);
LinOp operator+(const LinOp& lhs, const LinOp& rhs);
LinOp operator-(const LinOp& lhs, const LinOp& rhs);
LinOp operator*(double scale, const LinOp& op);

/// The operator's factorization, computed with a general eigensolver when the
/// operator does not carry one. Throws NumericError on complex spectrum.
std::shared_ptr<const SpectralFactor> spectral_factor(const LinOp& op);

/// Eigen-data of lambda0*I - A.
struct Spectrum {
  Eigen::VectorXd eigenvalues;   // ascending, of lambda0 I - A
  Eigen::MatrixXd eigenvectors;  // orthonormal U of the symmetrized generator
  Eigen::VectorXd scaling;       // lambda0 I - A = D U diag(eig) U^T D^{-1}
};

Spectrum spectrum(const LinOp& generator, double lambda0);

/// Nodal three-point Laplacian with homogeneous Dirichlet data at 0 and
/// xi_max (control-volume form on the nonuniform mesh).
Eigen::MatrixXd nodal_laplacian(const space::Grid& grid);

/// The Dirichlet Laplacian A as a LinOp in orthonormalized coordinates of the
/// grid's weighted space, with its spectral factorization attached.
LinOp dirichlet_laplacian(const space::Grid& grid);

/// Conversion between orthonormalized and nodal matrix representations.
Eigen::MatrixXd to_nodal(const LinOp& op, const space::Gram& gram);

// Half-line Dirichlet heat kernel.
double heat_kernel(double t, double xi, double eta);

/// e^{tA} realized by quadrature of the exact half-line kernel against the
/// grid's quadrature rule (no truncation boundary).
Eigen::VectorXd apply_semigroup_kernel(double t, const Eigen::VectorXd& f,
                                       const space::Grid& grid);

/// Closed form of (e^{tA} e^{-mu .})(xi) on the half-line.
double semigroup_on_exponential(double t, double mu, double xi);

// Scaled complementary error function exp(x^2) erfc(x), x >= 0.
double erfcx(double x);

LinOp semigroup_matrix(const LinOp& generator, double t);

/// (lambda0 I - A)^gamma. Throws NumericError if lambda0 I - A has a
/// nonpositive eigenvalue.
LinOp fractional_power(const LinOp& generator, double lambda0, double gamma);

/// a * psi_lambda sampled on the nodes, psi_lambda(xi) = exp(-sqrt(lambda) xi).
Eigen::VectorXd dirichlet_map(double lambda, double a, const space::Grid& grid);

/// Boundary actuation data. Nodal vectors plus their orthonormalized images.
struct BoundaryInput {
  double lambda0 = 1.0;
  double alpha = 0.6;
  Eigen::VectorXd psi;    // psi_{lambda0}
  Eigen::VectorXd e_vec;  // (lambda0 - A)^alpha psi
  Eigen::VectorXd b_vec;  // (lambda0 - A) psi
  Eigen::VectorXd psi_ortho;
  Eigen::VectorXd e_ortho;
  Eigen::VectorXd b_ortho;
  std::uint64_t grid_id = 0;
};

// Admissible interval (1/2, 1/2 + theta/4) for alpha.
bool alpha_admissible(double alpha, const space::WeightSpec& weight);

BoundaryInput boundary_input(const LinOp& generator, const space::Grid& grid,
                             double lambda0, double alpha);

/// I_n = (n (n - A)^{-1})^2.
LinOp yosida(const LinOp& generator, int n);

/// Integral over (0, t_cut) of t^{2 sigma - 3} |(e^{tA} - I) psi_lambda|_H^2 in
/// the space given by `weight` on the grid's nodes. Evaluated on a geometric
/// t-grid with `points_per_decade` nodes per decade down to the discrete
/// resolution limit, plus the analytic small-t remainder.
double regularity_integral(const space::WeightSpec& weight, double lambda, double sigma,
                           double t_cut, const space::Grid& grid,
                           int points_per_decade = 24);

// Same integral for an arbitrary nodal vector f in place of psi_lambda.
double regularity_integral(const Eigen::VectorXd& f, double sigma, double t_cut,
                           const space::Grid& grid, int points_per_decade = 24);

/// |(lambda0 - A) e^{sA} psi_{lambda0}|_H^2
double gamma_integrand(const BoundaryInput& bi, const LinOp& generator, double s);

/// Integral over (0, T) of s^{-gamma} |(lambda0 - A) e^{sA} psi_{lambda0}|_H^2.
double gamma_integral(const BoundaryInput& bi, const LinOp& generator, double gamma,
                      double horizon, int points_per_decade = 24);

// Largest singular value by power iteration on M^T M.
double operator_norm(const Eigen::MatrixXd& m);

/// ||f(A)||_{H->H} for f applied to the spectrum of -A, without forming f(A).
double spectral_function_norm(const SpectralFactor& factor,
                              const std::function<double(double)>& f);

}  // namespace halfline::ops
