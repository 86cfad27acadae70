#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "halfline/errors.hpp"
#include "halfline/operators.hpp"

namespace halfline::ops {
namespace {

void check_compatible(const LinOp& lhs, const LinOp& rhs) {
  if (lhs.grid_id() != rhs.grid_id()) {
    throw DimensionError("operators act on different grids");
  }
  if (lhs.size() != rhs.size()) {
    throw DimensionError("operator sizes differ");
  }
}

}  // namespace

Eigen::MatrixXd SpectralFactor::function(const std::function<double(double)>& f) const {
  Eigen::VectorXd values(kappa.size());
  for (Eigen::Index i = 0; i < kappa.size(); ++i) values[i] = f(kappa[i]);
  return basis * values.asDiagonal() * basis_inv;
}

Eigen::VectorXd SpectralFactor::apply_function(const std::function<double(double)>& f,
                                               const Eigen::VectorXd& v) const {
  Eigen::VectorXd modal = basis_inv * v;
  for (Eigen::Index i = 0; i < kappa.size(); ++i) modal[i] *= f(kappa[i]);
  return basis * modal;
}

Eigen::VectorXd SpectralFactor::apply_function_transposed(
    const std::function<double(double)>& f, const Eigen::VectorXd& v) const {
  Eigen::VectorXd modal = basis.transpose() * v;
  for (Eigen::Index i = 0; i < kappa.size(); ++i) modal[i] *= f(kappa[i]);
  return basis_inv.transpose() * modal;
}

LinOp::LinOp(Eigen::MatrixXd matrix, std::uint64_t grid_id,
             std::shared_ptr<const SpectralFactor> spectral)
    : matrix_(std::move(matrix)), grid_id_(grid_id), spectral_(std::move(spectral)) {
  if (matrix_.rows() != matrix_.cols()) {
    throw DimensionError("LinOp must be square");
  }
  if (spectral_ && spectral_->size() != matrix_.rows()) {
    throw DimensionError("spectral factor size does not match operator");
  }
}

const SpectralFactor& LinOp::spectral() const {
  if (!spectral_) throw NumericError("operator carries no spectral factorization");
  return *spectral_;
}

Eigen::VectorXd LinOp::apply(const Eigen::VectorXd& ortho) const {
  if (ortho.size() != matrix_.cols()) {
    throw DimensionError("vector size does not match operator");
  }
  return matrix_ * ortho;
}

LinOp LinOp::adjoint() const { return LinOp(matrix_.transpose(), grid_id_); }

LinOp LinOp::identity(Eigen::Index n, std::uint64_t grid_id) {
  return LinOp(Eigen::MatrixXd::Identity(n, n), grid_id);
}

LinOp LinOp::zero(Eigen::Index n, std::uint64_t grid_id) {
  return LinOp(Eigen::MatrixXd::Zero(n, n), grid_id);
}

LinOp operator*(const LinOp& lhs, const LinOp& rhs) {
  check_compatible(lhs, rhs);
  return LinOp(lhs.matrix() * rhs.matrix(), lhs.grid_id());
}

LinOp operator+(const LinOp& lhs, const LinOp& rhs) {
  check_compatible(lhs, rhs);
  return LinOp(lhs.matrix() + rhs.matrix(), lhs.grid_id());
}

LinOp operator-(const LinOp& lhs, const LinOp& rhs) {
  check_compatible(lhs, rhs);
  return LinOp(lhs.matrix() - rhs.matrix(), lhs.grid_id());
}

LinOp operator*(double scale, const LinOp& op) {
  return LinOp(scale * op.matrix(), op.grid_id());
}

std::shared_ptr<const SpectralFactor> spectral_factor(const LinOp& op) {
  if (op.has_spectral()) return op.spectral_ptr();
  const Eigen::MatrixXd& m = op.matrix();
  const Eigen::Index n = m.rows();
  auto factor = std::make_shared<SpectralFactor>();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(-m);
    if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed");
    factor->kappa = solver.eigenvalues();
    factor->basis = solver.eigenvectors();
    factor->basis_inv = solver.eigenvectors().transpose();
    factor->orthonormal = solver.eigenvectors();
    factor->scaling = Eigen::VectorXd::Ones(n);
    return factor;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(-m);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver failed");
  const Eigen::VectorXcd eig = solver.eigenvalues();
  if (eig.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw NumericError("operator has complex spectrum; a real diagonalization is required");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return eig[a].real() < eig[b].real(); });
  const Eigen::MatrixXcd vecs = solver.eigenvectors();
  factor->kappa.resize(n);
  factor->basis.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    factor->kappa[k] = eig[order[static_cast<std::size_t>(k)]].real();
    factor->basis.col(k) = vecs.col(order[static_cast<std::size_t>(k)]).real();
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(factor->basis);
  if (!(std::abs(lu.determinant()) > 0.0)) throw NumericError("operator is not diagonalizable");
  factor->basis_inv = lu.inverse();
  return factor;
}

Spectrum spectrum(const LinOp& generator, double lambda0) {
  const auto factor = spectral_factor(generator);
  Spectrum out;
  out.eigenvalues = factor->kappa.array() + lambda0;
  if (factor->orthonormal.size() > 0) {
    out.eigenvectors = factor->orthonormal;
    out.scaling = factor->scaling;
  } else {
    out.eigenvectors = factor->basis;
    out.scaling = Eigen::VectorXd::Ones(factor->size());
  }
  return out;
}

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::VectorXd v(m.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.25 * std::sin(1.0 + 3.0 * i);
  v.normalize();
  double estimate = 0.0;
  for (int iter = 0; iter < 5000; ++iter) {
    const Eigen::VectorXd w = m * v;
    const double next = w.norm();
    Eigen::VectorXd u = m.transpose() * w;
    const double un = u.norm();
    if (un == 0.0) return next;
    v = u / un;
    if (iter > 3 && std::abs(next - estimate) <= 1e-12 * next) return next;
    estimate = next;
  }
  return estimate;
}

double spectral_function_norm(const SpectralFactor& factor,
                              const std::function<double(double)>& f) {
  const Eigen::Index n = factor.size();
  Eigen::VectorXd values(n);
  for (Eigen::Index i = 0; i < n; ++i) values[i] = f(factor.kappa[i]);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.25 * std::sin(1.0 + 3.0 * i);
  v.normalize();
  double estimate = 0.0;
  for (int iter = 0; iter < 5000; ++iter) {
    const Eigen::VectorXd w =
        factor.basis * (values.cwiseProduct(factor.basis_inv * v));
    const double next = w.norm();
    Eigen::VectorXd u =
        factor.basis_inv.transpose() * (values.cwiseProduct(factor.basis.transpose() * w));
    const double un = u.norm();
    if (un == 0.0) return next;
    v = u / un;
    if (iter > 3 && std::abs(next - estimate) <= 1e-12 * next) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace halfline::ops
