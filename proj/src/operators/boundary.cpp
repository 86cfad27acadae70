#include <algorithm>
#include <cmath>
#include <string>

#include "halfline/errors.hpp"
#include "halfline/operators.hpp"

namespace halfline::ops {
namespace {

// Trapezoid rule in u = log t for the integral over (t_lo, t_hi) of g(t) dt,
// where `log_integrand(t)` must already return t * g(t).
template <class F>
double log_trapezoid(double t_lo, double t_hi, int points_per_decade, F&& log_integrand) {
  if (!(t_hi > t_lo)) return 0.0;
  const double decades = std::log10(t_hi / t_lo);
  const int panels = std::max(4, static_cast<int>(std::ceil(points_per_decade * decades)));
  const double du = (std::log(t_hi) - std::log(t_lo)) / panels;
  double sum = 0.5 * (log_integrand(t_lo) + log_integrand(t_hi));
  for (int k = 1; k < panels; ++k) sum += log_integrand(t_lo * std::exp(k * du));
  return sum * du;
}

bool same_weight(const space::WeightSpec& a, const space::WeightSpec& b) {
  if (a.kind != b.kind) return false;
  return a.kind == space::WeightKind::unit || a.theta == b.theta;
}

}  // namespace

bool alpha_admissible(double alpha, const space::WeightSpec& weight) {
  if (weight.kind == space::WeightKind::unit) return false;
  return alpha > 0.5 && alpha < 0.5 + weight.theta / 4.0;
}

BoundaryInput boundary_input(const LinOp& generator, const space::Grid& grid,
                             double lambda0, double alpha) {
  if (generator.grid_id() != grid.id()) {
    throw DimensionError("boundary_input: generator was built on a different grid");
  }
  if (!(lambda0 > 0.0) || !std::isfinite(lambda0)) {
    throw ConfigError("lambda0 must be positive, got " + std::to_string(lambda0));
  }
  if (!alpha_admissible(alpha, grid.weight())) {
    const double upper = 0.5 + grid.weight().theta / 4.0;
    throw ConfigError("alpha must lie in (1/2, 1/2 + theta/4) = (0.5, " +
                      std::to_string(upper) + "), got " + std::to_string(alpha));
  }
  const space::Gram gram = space::make_gram(grid);
  const auto factor = spectral_factor(generator);

  BoundaryInput bi;
  bi.lambda0 = lambda0;
  bi.alpha = alpha;
  bi.grid_id = grid.id();
  bi.psi = dirichlet_map(lambda0, 1.0, grid);
  bi.psi_ortho = space::to_ortho(bi.psi, gram);
  bi.e_ortho = factor->apply_function(
      [=](double k) { return std::pow(lambda0 + k, alpha); }, bi.psi_ortho);
  // B psi through the assembled operator, independent of the spectral route.
  bi.b_ortho = lambda0 * bi.psi_ortho - generator.matrix() * bi.psi_ortho;
  bi.e_vec = space::from_ortho(bi.e_ortho, gram);
  bi.b_vec = space::from_ortho(bi.b_ortho, gram);

  const Eigen::VectorXd reproduced = factor->apply_function(
      [=](double k) { return std::pow(lambda0 + k, 1.0 - alpha); }, bi.e_ortho);
  const double mismatch = (reproduced - bi.b_ortho).norm() / bi.b_ortho.norm();
  if (!(mismatch <= 1e-8)) {
    throw NumericError("boundary_input: (lambda0 - A)^(1-alpha) E differs from B psi by " +
                       std::to_string(mismatch) + " (relative)");
  }
  return bi;
}

double regularity_integral(const space::WeightSpec& weight, double lambda, double sigma,
                           double t_cut, const space::Grid& grid, int points_per_decade) {
  const space::Grid target =
      same_weight(weight, grid.weight()) ? grid : space::with_weight(grid, weight);
  return regularity_integral(dirichlet_map(lambda, 1.0, target), sigma, t_cut, target,
                             points_per_decade);
}

double regularity_integral(const Eigen::VectorXd& f, double sigma, double t_cut,
                           const space::Grid& grid, int points_per_decade) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
  if (!(t_cut > 0.0 && t_cut <= 1.0)) throw ConfigError("t_cut must lie in (0, 1]");
  if (points_per_decade < 1) throw ConfigError("points_per_decade must be positive");
  if (f.size() != grid.nodes().size()) {
    throw DimensionError("regularity_integral: vector does not match grid");
  }
  const LinOp generator = dirichlet_laplacian(grid);
  const space::Gram gram = space::make_gram(grid);
  const SpectralFactor& factor = generator.spectral();
  const Eigen::VectorXd modal = factor.basis_inv * space::to_ortho(f, gram);
  if (modal.squaredNorm() == 0.0) return 0.0;

  const double exponent = 2.0 * sigma - 3.0;
  auto defect_sq = [&](double t) {
    const Eigen::VectorXd coeffs =
        modal.cwiseProduct((-t * factor.kappa).array().expm1().matrix());
    return (factor.basis * coeffs).squaredNorm();
  };
  const double t_min = std::min(t_cut, 1e-3 / factor.kappa.maxCoeff());
  const double body = log_trapezoid(t_min, t_cut, points_per_decade, [&](double t) {
    return std::pow(t, exponent + 1.0) * defect_sq(t);
  });
  // Below t_min, (e^{tA} - I) f = t A f to relative accuracy 1e-3.
  const double generator_norm_sq =
      (factor.basis * modal.cwiseProduct(factor.kappa)).squaredNorm();
  const double tail = generator_norm_sq * std::pow(t_min, 2.0 * sigma) / (2.0 * sigma);
  return body + tail;
}

double gamma_integrand(const BoundaryInput& bi, const LinOp& generator, double s) {
  if (generator.grid_id() != bi.grid_id) throw DimensionError("gamma_integrand: grid mismatch");
  if (!(s >= 0.0)) throw DomainError("gamma_integrand: s must be nonnegative");
  const auto factor = spectral_factor(generator);
  return factor->apply_function([s](double k) { return std::exp(-s * k); }, bi.b_ortho)
      .squaredNorm();
}

double gamma_integral(const BoundaryInput& bi, const LinOp& generator, double gamma,
                      double horizon, int points_per_decade) {
  if (generator.grid_id() != bi.grid_id) throw DimensionError("gamma_integral: grid mismatch");
  if (!(gamma < 1.0)) throw ConfigError("gamma must be below 1");
  if (!(horizon > 0.0)) throw ConfigError("gamma_integral: horizon must be positive");
  const auto factor = spectral_factor(generator);
  const Eigen::VectorXd modal = factor->basis_inv * bi.b_ortho;
  auto integrand = [&](double s) {
    const Eigen::VectorXd coeffs = modal.cwiseProduct((-s * factor->kappa).array().exp().matrix());
    return (factor->basis * coeffs).squaredNorm();
  };
  const double s_min = std::min(horizon, 1e-3 / factor->kappa.maxCoeff());
  const double body = log_trapezoid(s_min, horizon, points_per_decade, [&](double s) {
    return std::pow(s, 1.0 - gamma) * integrand(s);
  });
  const double tail = bi.b_ortho.squaredNorm() * std::pow(s_min, 1.0 - gamma) / (1.0 - gamma);
  return body + tail;
}

}  // namespace halfline::ops
