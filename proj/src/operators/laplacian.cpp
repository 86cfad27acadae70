#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "halfline/errors.hpp"
#include "halfline/operators.hpp"

namespace halfline::ops {
namespace {

// Mesh spacings h_{-1..n-1} including the virtual endpoints, and the control
// volume widths (h_{i-1} + h_i) / 2 that make the stiffness form symmetric.
struct MeshMetrics {
  Eigen::VectorXd spacing;  // spacing[i] = x_{i} - x_{i-1}, i = 0..n, x_{-1}=0, x_n=xi_max
  Eigen::VectorXd volume;   // length n
};

MeshMetrics mesh_metrics(const space::Grid& grid) {
  const Eigen::VectorXd& x = grid.nodes();
  const Eigen::Index n = x.size();
  MeshMetrics m;
  m.spacing.resize(n + 1);
  m.spacing[0] = x[0];
  for (Eigen::Index i = 1; i < n; ++i) m.spacing[i] = x[i] - x[i - 1];
  m.spacing[n] = grid.xi_max() - x[n - 1];
  for (Eigen::Index i = 0; i <= n; ++i) {
    if (!(m.spacing[i] > 0.0) || !std::isfinite(m.spacing[i])) {
      throw NumericError("dirichlet_laplacian: degenerate mesh spacing at index " +
                         std::to_string(i));
    }
  }
  m.volume = 0.5 * (m.spacing.head(n) + m.spacing.tail(n));
  return m;
}

}  // namespace

Eigen::MatrixXd nodal_laplacian(const space::Grid& grid) {
  const MeshMetrics m = mesh_metrics(grid);
  const Eigen::Index n = m.volume.size();
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = 1.0 / m.spacing[i];
    const double right = 1.0 / m.spacing[i + 1];
    lap(i, i) = -(left + right) / m.volume[i];
    if (i > 0) lap(i, i - 1) = left / m.volume[i];
    if (i + 1 < n) lap(i, i + 1) = right / m.volume[i];
  }
  return lap;
}

LinOp dirichlet_laplacian(const space::Grid& grid) {
  const MeshMetrics m = mesh_metrics(grid);
  const Eigen::Index n = m.volume.size();
  const space::Gram gram = space::make_gram(grid);

  // -A_nodal = V^{-1} K with K the symmetric stiffness matrix and V the control
  // volumes. The symmetric matrix V^{-1/2} K V^{-1/2} is tridiagonal.
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    diag[i] = (1.0 / m.spacing[i] + 1.0 / m.spacing[i + 1]) / m.volume[i];
    if (i + 1 < n) {
      sub[i] = -1.0 / (m.spacing[i + 1] * std::sqrt(m.volume[i] * m.volume[i + 1]));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericError("dirichlet_laplacian: tridiagonal eigensolver failed");
  }

  // Orthonormalized weighted coordinates y = G^{1/2} f relate to the
  // symmetrizing coordinates V^{1/2} f through the diagonal scaling below.
  const Eigen::VectorXd scaling =
      (gram.diag.array() / m.volume.array()).sqrt().matrix();

  auto factor = std::make_shared<SpectralFactor>();
  factor->kappa = solver.eigenvalues();
  factor->orthonormal = solver.eigenvectors();
  factor->scaling = scaling;
  factor->basis = scaling.asDiagonal() * factor->orthonormal;
  factor->basis_inv = factor->orthonormal.transpose() * scaling.cwiseInverse().asDiagonal();
  if (!(factor->kappa[0] > 0.0)) {
    throw NumericError("dirichlet_laplacian: generator is not dissipative");
  }

  Eigen::MatrixXd ortho = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ortho(i, i) = -diag[i];
    if (i + 1 < n) {
      ortho(i, i + 1) = -sub[i] * scaling[i] / scaling[i + 1];
      ortho(i + 1, i) = -sub[i] * scaling[i + 1] / scaling[i];
    }
  }
  return LinOp(std::move(ortho), grid.id(), std::move(factor));
}

Eigen::MatrixXd to_nodal(const LinOp& op, const space::Gram& gram) {
  if (op.grid_id() != gram.grid_id) throw DimensionError("operator and Gram differ in grid");
  return gram.inv_sqrt_diag.asDiagonal() * op.matrix() * gram.sqrt_diag.asDiagonal();
}

}  // namespace halfline::ops
