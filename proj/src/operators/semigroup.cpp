#include <cmath>
#include <numbers>
#include <string>

#include "halfline/errors.hpp"
#include "halfline/operators.hpp"

namespace halfline::ops {

double heat_kernel(double t, double xi, double eta) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("heat_kernel: t must be positive");
  if (!std::isfinite(xi) || !std::isfinite(eta)) {
    throw DomainError("heat_kernel: non-finite argument");
  }
  const double d = xi - eta;
  // e^{-(xi-eta)^2/4t} - e^{-(xi+eta)^2/4t} = e^{-(xi-eta)^2/4t} (1 - e^{-xi eta / t})
  return std::exp(-d * d / (4.0 * t)) * -std::expm1(-xi * eta / t) /
         std::sqrt(4.0 * std::numbers::pi * t);
}

Eigen::VectorXd apply_semigroup_kernel(double t, const Eigen::VectorXd& f,
                                       const space::Grid& grid) {
  if (f.size() != grid.nodes().size()) {
    throw DimensionError("apply_semigroup_kernel: vector does not match grid");
  }
  const Eigen::VectorXd& x = grid.nodes();
  const Eigen::VectorXd fw = f.cwiseProduct(grid.quad_weights());
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (fw[j] != 0.0) acc += heat_kernel(t, x[i], x[j]) * fw[j];
    }
    y[i] = acc;
  }
  return y;
}

double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  // Asymptotic series; the truncation error is below 1e-16 relative here.
  const double inv2 = 1.0 / (x * x);
  const double series =
      1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2 +
      6.5625 * inv2 * inv2 * inv2 * inv2;
  return series / (x * std::sqrt(std::numbers::pi));
}

double semigroup_on_exponential(double t, double mu, double xi) {
  if (!(t > 0.0)) throw DomainError("semigroup_on_exponential: t must be positive");
  if (!(mu > 0.0)) throw DomainError("semigroup_on_exponential: mu must be positive");
  if (!(xi >= 0.0)) throw DomainError("semigroup_on_exponential: xi must be nonnegative");
  if (xi == 0.0) return 0.0;
  // Completing the square in each image term of the kernel:
  //   direct: exp(mu^2 t - mu xi) Phi((xi - 2 mu t) / sqrt(2t))
  //   image:  exp(mu^2 t + mu xi) Phi(-(xi + 2 mu t) / sqrt(2t))
  //         = erfcx((xi + 2 mu t) / (2 sqrt t)) exp(-xi^2 / 4t) / 2
  const double root_t = std::sqrt(t);
  const double direct = std::exp(mu * mu * t - mu * xi) * 0.5 *
                        std::erfc(-(xi - 2.0 * mu * t) / (2.0 * root_t));
  const double image =
      0.5 * erfcx((xi + 2.0 * mu * t) / (2.0 * root_t)) * std::exp(-xi * xi / (4.0 * t));
  return direct - image;
}

LinOp semigroup_matrix(const LinOp& generator, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("semigroup_matrix: t must be finite and nonnegative");
  }
  if (t == 0.0) return LinOp::identity(generator.size(), generator.grid_id());
  const auto factor = spectral_factor(generator);
  return LinOp(factor->function([t](double k) { return std::exp(-t * k); }),
               generator.grid_id());
}

LinOp fractional_power(const LinOp& generator, double lambda0, double gamma) {
  if (!std::isfinite(lambda0) || !std::isfinite(gamma)) {
    throw DomainError("fractional_power: non-finite argument");
  }
  const auto factor = spectral_factor(generator);
  const double smallest = factor->kappa.minCoeff() + lambda0;
  if (!(smallest > 0.0)) {
    throw NumericError("fractional_power: lambda0 I - A has nonpositive eigenvalue " +
                       std::to_string(smallest) + "; increase lambda0");
  }
  if (gamma == 0.0) return LinOp::identity(generator.size(), generator.grid_id());
  return LinOp(factor->function([=](double k) { return std::pow(lambda0 + k, gamma); }),
               generator.grid_id());
}

Eigen::VectorXd dirichlet_map(double lambda, double a, const space::Grid& grid) {
  if (!(lambda > 0.0)) throw DomainError("dirichlet_map: lambda must be positive");
  const double root = std::sqrt(lambda);
  Eigen::VectorXd out(grid.nodes().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = a * std::exp(-root * grid.nodes()[i]);
  return out;
}

LinOp yosida(const LinOp& generator, int n) {
  if (n < 1) throw DomainError("yosida: n must be at least 1");
  const Eigen::Index size = generator.size();
  const double nd = static_cast<double>(n);
  const Eigen::MatrixXd shifted =
      nd * Eigen::MatrixXd::Identity(size, size) - generator.matrix();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  if (lu.rcond() < 1e-14) throw NumericError("yosida: resolvent is singular");
  const Eigen::MatrixXd resolvent = nd * lu.inverse();
  return LinOp(resolvent * resolvent, generator.grid_id());
}

}  // namespace halfline::ops
