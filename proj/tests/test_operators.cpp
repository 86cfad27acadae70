#include "halfline/operators.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "halfline/errors.hpp"
#include "support/oracles.hpp"

namespace halfline {
namespace ops {
namespace {

using space::build_grid;
using space::Grid;
using space::WeightKind;
using space::WeightSpec;
using testing::random_vector;
using testing::relative_error;

const WeightSpec kPower{0.8, WeightKind::pure_power};
const WeightSpec kCapped{0.8, WeightKind::capped};
const WeightSpec kUnit{0.8, WeightKind::unit};

Eigen::VectorXd Bump(const Grid& grid, double lo, double hi) {
  return space::sample(grid, [&](double xi) {
    if (xi <= lo || xi >= hi) return 0.0;
    const double s = (xi - lo) / (hi - lo);
    return std::pow(std::sin(std::numbers::pi * s), 4);
  });
}

GTEST_TEST(LaplacianTest, UniformStencil) {
  const Grid grid = build_grid(kPower, 9, 10.0, 1.0);
  const double h = 1.0;
  const Eigen::MatrixXd lap = nodal_laplacian(grid);
  EXPECT_NEAR(lap(4, 3), 1.0 / (h * h), 1e-13);
  EXPECT_NEAR(lap(4, 4), -2.0 / (h * h), 1e-13);
  EXPECT_NEAR(lap(4, 5), 1.0 / (h * h), 1e-13);
  EXPECT_EQ(lap(4, 6), 0.0);
}

GTEST_TEST(LaplacianTest, SineIsEigenfunction) {
  const double L = 10.0;
  const Grid grid = build_grid(kPower, 999, L, 1.0);
  const Eigen::VectorXd f =
      space::sample(grid, [&](double xi) { return std::sin(std::numbers::pi * xi / L); });
  const Eigen::VectorXd lap_f = nodal_laplacian(grid) * f;
  const double mu = std::pow(std::numbers::pi / L, 2);
  EXPECT_LE((lap_f + mu * f).norm() / (mu * f.norm()), 1e-3);
}

GTEST_TEST(LaplacianTest, SmallestEigenvalue) {
  const Grid grid = build_grid(kPower, 400, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const double expected = std::pow(std::numbers::pi / 20.0, 2);
  EXPECT_NEAR(a.spectral().kappa[0], expected, 1e-3 * expected);
  EXPECT_GT(a.spectral().kappa.minCoeff(), 0.0);
}

GTEST_TEST(LaplacianTest, OrthoMatrixMatchesNodalAssembly) {
  const Grid grid = build_grid(kCapped, 60, 12.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const space::Gram gram = space::make_gram(grid);
  EXPECT_LE(relative_error(to_nodal(a, gram), nodal_laplacian(grid)), 1e-13);
  const SpectralFactor& f = a.spectral();
  const Eigen::MatrixXd rebuilt = -f.basis * f.kappa.asDiagonal() * f.basis_inv;
  EXPECT_LE(relative_error(rebuilt, a.matrix()), 1e-11);
  EXPECT_LE(relative_error(f.basis * f.basis_inv, Eigen::MatrixXd::Identity(60, 60)), 1e-11);
}

GTEST_TEST(LaplacianTest, WeightedAdjointIsTranspose) {
  const Grid grid = build_grid(kPower, 50, 10.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const space::Gram gram = space::make_gram(grid);
  const Eigen::MatrixXd nodal = to_nodal(a, gram);
  const Eigen::MatrixXd nodal_adj = to_nodal(a.adjoint(), gram);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::VectorXd f = random_vector(50, seed);
    const Eigen::VectorXd g = random_vector(50, seed + 77);
    const double lhs = space::inner(nodal * f, g, gram);
    const double rhs = space::inner(f, nodal_adj * g, gram);
    EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs) + 1e-12);
  }
}

GTEST_TEST(LinOpTest, CompositionRequiresSameGrid) {
  const Grid g1 = build_grid(kPower, 20, 10.0, 2.0);
  const Grid g2 = build_grid(kPower, 20, 10.0, 2.0);
  const LinOp a = dirichlet_laplacian(g1);
  const LinOp b = dirichlet_laplacian(g2);
  EXPECT_THROW(a * b, DimensionError);
  EXPECT_THROW(a + b, DimensionError);
  EXPECT_NO_THROW(a * a);
  EXPECT_THROW(LinOp::zero(20, g1.id()).spectral(), NumericError);
}

GTEST_TEST(LinOpTest, SpectrumReconstruction) {
  const Grid grid = build_grid(kPower, 80, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const Spectrum s = spectrum(a, 1.0);
  EXPECT_GT(s.eigenvalues.minCoeff(), 0.0);
  const Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(80, 80) - a.matrix();
  const Eigen::MatrixXd rebuilt = s.scaling.asDiagonal() * s.eigenvectors *
                                  s.eigenvalues.asDiagonal() * s.eigenvectors.transpose() *
                                  s.scaling.cwiseInverse().asDiagonal();
  EXPECT_LE((rebuilt - shifted).norm(), 1e-8 * shifted.norm());
  EXPECT_LE((s.eigenvectors.transpose() * s.eigenvectors - Eigen::MatrixXd::Identity(80, 80))
                .norm(),
            1e-12);
}

GTEST_TEST(LinOpTest, OperatorNormMatchesSvd) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(
      30, 30, [](Eigen::Index i, Eigen::Index j) { return std::sin(1.0 + i * 0.7 + j * j * 0.3); });
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  EXPECT_NEAR(operator_norm(m), svd.singularValues()[0], 1e-9 * svd.singularValues()[0]);
  EXPECT_EQ(operator_norm(Eigen::MatrixXd::Zero(4, 4)), 0.0);
}

GTEST_TEST(LinOpTest, SpectralFunctionNormMatchesDense) {
  const Grid grid = build_grid(kPower, 60, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  for (double t : {1e-3, 0.1, 1.0}) {
    auto f = [t](double k) { return t * k * std::exp(-t * k); };
    const double dense = operator_norm(a.spectral().function(f));
    EXPECT_NEAR(spectral_function_norm(a.spectral(), f), dense, 1e-8 * dense);
  }
}

GTEST_TEST(HeatKernelTest, Values) {
  EXPECT_EQ(heat_kernel(1.0, 0.0, 3.0), 0.0);
  EXPECT_NEAR(heat_kernel(1.0, 1.0, 1.0),
              (1.0 - std::exp(-1.0)) / std::sqrt(4.0 * std::numbers::pi), 1e-15);
  EXPECT_EQ(heat_kernel(0.5, 1.0, 2.0), heat_kernel(0.5, 2.0, 1.0));
  EXPECT_THROW(heat_kernel(0.0, 1.0, 1.0), DomainError);
  for (double t : {0.01, 0.3, 2.0}) {
    for (double xi : {0.05, 0.7, 3.0}) {
      for (double eta : {0.1, 1.1, 4.0}) {
        EXPECT_NEAR(heat_kernel(t, xi, eta), testing::reference_kernel(t, xi, eta), 1e-13);
        EXPECT_EQ(heat_kernel(t, xi, eta), heat_kernel(t, eta, xi));
      }
    }
  }
}

GTEST_TEST(HeatKernelTest, KernelSemigroupBasics) {
  const Grid grid = build_grid(kPower, 200, 20.0, 2.0);
  EXPECT_TRUE(apply_semigroup_kernel(0.1, Eigen::VectorXd::Zero(200), grid).isZero(0.0));
  const Eigen::VectorXd f = random_vector(200, 3).cwiseAbs();
  EXPECT_GE(apply_semigroup_kernel(0.1, f, grid).minCoeff(), 0.0);
}

GTEST_TEST(HeatKernelTest, UnweightedContraction) {
  const Grid grid = build_grid(kUnit, 300, 20.0, 2.0);
  const space::Gram gram = space::make_gram(grid);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::VectorXd f = random_vector(300, seed);
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      if (grid.nodes()[i] > 10.0) f[i] = 0.0;
    }
    for (double t : {0.01, 0.1, 1.0}) {
      EXPECT_LE(space::norm(apply_semigroup_kernel(t, f, grid), gram),
                space::norm(f, gram) * (1.0 + 1e-12));
    }
  }
}

GTEST_TEST(SemigroupOnExponentialTest, MatchesQuadrature) {
  for (double t : {0.01, 0.25, 1.0, 3.0}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      for (double xi : {0.01, 0.5, 1.0, 4.0, 9.0}) {
        const double expected = testing::reference_semigroup_on_exponential(t, mu, xi);
        EXPECT_NEAR(semigroup_on_exponential(t, mu, xi), expected,
                    1e-10 * std::max(1e-3, std::abs(expected)))
            << "t=" << t << " mu=" << mu << " xi=" << xi;
      }
    }
  }
  EXPECT_EQ(semigroup_on_exponential(0.7, 1.3, 0.0), 0.0);
  EXPECT_NEAR(semigroup_on_exponential(1e-8, 1.0, 1.0), std::exp(-1.0), 1e-6);
}

GTEST_TEST(SemigroupOnExponentialTest, KernelQuadratureOnExponential) {
  const Grid grid = build_grid(kPower, 400, 20.0, 2.0);
  const Eigen::VectorXd f = space::sample(grid, [](double xi) { return std::exp(-xi); });
  const Eigen::VectorXd y = apply_semigroup_kernel(0.25, f, grid);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double xi = grid.nodes()[i];
    if (xi < 0.5 || xi > 10.0) continue;
    const double exact = semigroup_on_exponential(0.25, 1.0, xi);
    EXPECT_NEAR(y[i], exact, 1e-3 * exact) << "xi=" << xi;
  }
}

GTEST_TEST(SemigroupMatrixTest, IdentityAndGroupLaw) {
  const Grid grid = build_grid(kPower, 120, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  EXPECT_TRUE(semigroup_matrix(a, 0.0).matrix().isIdentity(0.0));
  const Eigen::MatrixXd sum = semigroup_matrix(a, 0.4).matrix();
  const Eigen::MatrixXd product =
      semigroup_matrix(a, 0.1).matrix() * semigroup_matrix(a, 0.3).matrix();
  EXPECT_LE((sum - product).norm(), 1e-10 * sum.norm());
  EXPECT_THROW(semigroup_matrix(a, -1.0), DomainError);
}

GTEST_TEST(SemigroupMatrixTest, EigenvectorDecay) {
  const Grid grid = build_grid(kCapped, 80, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const SpectralFactor& f = a.spectral();
  const Eigen::VectorXd v = f.basis.col(3);
  const Eigen::VectorXd evolved = semigroup_matrix(a, 0.7).apply(v);
  EXPECT_LE((evolved - std::exp(-0.7 * f.kappa[3]) * v).norm(), 1e-10 * v.norm());
}

GTEST_TEST(SemigroupMatrixTest, AgreesWithKernelOnBump) {
  const Grid grid = build_grid(kPower, 400, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const space::Gram gram = space::make_gram(grid);
  const Eigen::VectorXd f = Bump(grid, 1.0, 3.0);
  const Eigen::VectorXd by_kernel = apply_semigroup_kernel(0.1, f, grid);
  const Eigen::VectorXd by_matrix =
      space::from_ortho(semigroup_matrix(a, 0.1).apply(space::to_ortho(f, gram)), gram);
  EXPECT_LE(space::norm(by_kernel - by_matrix, gram) / space::norm(by_kernel, gram), 1e-2);
}

GTEST_TEST(FractionalPowerTest, IdentityAndReconstruction) {
  const Grid grid = build_grid(kPower, 150, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  EXPECT_TRUE(fractional_power(a, 1.0, 0.0).matrix().isIdentity(0.0));
  const Eigen::MatrixXd shifted = Eigen::MatrixXd::Identity(150, 150) - a.matrix();
  const Eigen::MatrixXd one = fractional_power(a, 1.0, 1.0).matrix();
  EXPECT_LE((one - shifted).norm(), 1e-9 * shifted.norm());
  const Eigen::MatrixXd half = fractional_power(a, 1.0, 0.5).matrix();
  EXPECT_LE((half * half - shifted).norm(), 1e-9 * shifted.norm());
}

GTEST_TEST(FractionalPowerTest, GroupLaw) {
  const Grid grid = build_grid(kCapped, 200, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  for (auto [g, d] : {std::pair{0.3, 0.45}, std::pair{0.6, 0.4}, std::pair{-0.25, 0.7}}) {
    const Eigen::MatrixXd lhs =
        fractional_power(a, 1.0, g).matrix() * fractional_power(a, 1.0, d).matrix();
    const Eigen::MatrixXd rhs = fractional_power(a, 1.0, g + d).matrix();
    EXPECT_LE((lhs - rhs).norm(), 1e-9 * rhs.norm()) << g << " + " << d;
  }
}

GTEST_TEST(FractionalPowerTest, RejectsNonpositiveShift) {
  const Grid grid = build_grid(kPower, 40, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  EXPECT_THROW(fractional_power(a, -1.0, 0.5), NumericError);
}

GTEST_TEST(DirichletMapTest, Values) {
  const Grid grid = build_grid(kPower, 100, 20.0, 2.0);
  const Eigen::VectorXd psi = dirichlet_map(1.0, 2.0, grid);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    EXPECT_EQ(psi[i], 2.0 * std::exp(-grid.nodes()[i]));
  }
  EXPECT_TRUE(dirichlet_map(3.0, 0.0, grid).isZero(0.0));
  // Linear extrapolation from the first two nodes recovers the boundary value.
  const Eigen::VectorXd unit = dirichlet_map(1.0, 1.0, grid);
  const double x0 = grid.nodes()[0], x1 = grid.nodes()[1];
  EXPECT_NEAR(unit[0] - x0 * (unit[1] - unit[0]) / (x1 - x0), 1.0, 1e-5);
}

GTEST_TEST(DirichletMapTest, DiscreteResidualVanishesUnderRefinement) {
  Grid grid = build_grid(kPower, 100, 20.0, 2.0);
  double previous = INFINITY;
  for (int level = 0; level < 3; ++level) {
    const Eigen::VectorXd psi = dirichlet_map(2.0, 1.0, grid);
    const Eigen::VectorXd residual = 2.0 * psi - nodal_laplacian(grid) * psi;
    // Interior nodes only; the first node sees the boundary value through psi(0) = 1.
    const double err = residual.segment(1, residual.size() - 2).cwiseAbs().maxCoeff();
    EXPECT_LT(err, previous);
    previous = err;
    grid = space::refine(grid);
  }
  EXPECT_LT(previous, 1e-2);
}

GTEST_TEST(BoundaryInputTest, Consistency) {
  const Grid grid = build_grid(kPower, 200, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const BoundaryInput bi = boundary_input(a, grid, 1.0, 0.5 + 0.8 / 8.0);
  const LinOp rest = fractional_power(a, 1.0, 1.0 - bi.alpha);
  EXPECT_LE((rest.apply(bi.e_ortho) - bi.b_ortho).norm(), 1e-8 * bi.b_ortho.norm());
  for (Eigen::Index i = 0; i < bi.psi.size(); ++i) {
    EXPECT_EQ(bi.psi[i], std::exp(-grid.nodes()[i]));
    if (i > 0) {
      EXPECT_LT(bi.psi[i], bi.psi[i - 1]);
    }
  }
  const space::Gram gram = space::make_gram(grid);
  EXPECT_TRUE(space::to_ortho(bi.b_vec, gram).isApprox(bi.b_ortho, 1e-14));
}

GTEST_TEST(BoundaryInputTest, RejectsInadmissibleAlpha) {
  const Grid grid = build_grid(kPower, 40, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  EXPECT_THROW(boundary_input(a, grid, 1.0, 0.3), ConfigError);
  EXPECT_THROW(boundary_input(a, grid, 1.0, 0.7), ConfigError);
  EXPECT_THROW(boundary_input(a, grid, 1.0, 0.5), ConfigError);
  EXPECT_TRUE(alpha_admissible(0.69, kPower));
  EXPECT_FALSE(alpha_admissible(0.6, kUnit));
  try {
    boundary_input(a, grid, 1.0, 0.3);
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("0.7"), std::string::npos);
  }
}

GTEST_TEST(YosidaTest, ZeroGeneratorAndEigenvectors) {
  const Grid grid = build_grid(kPower, 60, 20.0, 2.0);
  EXPECT_LE((yosida(LinOp::zero(60, grid.id()), 5).matrix() - Eigen::MatrixXd::Identity(60, 60))
                .norm(),
            1e-14);
  const LinOp a = dirichlet_laplacian(grid);
  const Eigen::VectorXd v = a.spectral().basis.col(5);
  const double mu = a.spectral().kappa[5];
  const double scale = std::pow(16.0 / (16.0 + mu), 2);
  EXPECT_LE((yosida(a, 16).apply(v) - scale * v).norm(), 1e-10 * v.norm());
  EXPECT_THROW(yosida(a, 0), DomainError);
}

GTEST_TEST(YosidaTest, ConvergesOnSmoothVector) {
  const Grid grid = build_grid(kPower, 200, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const space::Gram gram = space::make_gram(grid);
  const Eigen::VectorXd f = space::to_ortho(Bump(grid, 1.0, 4.0), gram);
  double previous = INFINITY;
  for (int n : {16, 64, 256}) {
    const double err = (yosida(a, n).apply(f) - f).norm();
    EXPECT_LE(err, previous);
    previous = err;
  }
  EXPECT_LT(previous, 0.05 * f.norm());
}

GTEST_TEST(RegularityIntegralTest, ZeroVectorGivesZero) {
  const Grid grid = build_grid(kPower, 100, 20.0, 2.0);
  EXPECT_EQ(regularity_integral(Eigen::VectorXd::Zero(100), 0.4, 1.0, grid), 0.0);
  EXPECT_THROW(regularity_integral(kPower, 1.0, 1.2, 1.0, grid), ConfigError);
  EXPECT_THROW(regularity_integral(kPower, 1.0, 0.4, 2.0, grid), ConfigError);
}

GTEST_TEST(RegularityIntegralTest, StableUnderTimeRefinementInWeightedSpace) {
  const Grid grid = build_grid(kPower, 200, 20.0, 2.0);
  const double coarse = regularity_integral(kPower, 1.0, 0.4, 1.0, grid, 12);
  const double fine = regularity_integral(kPower, 1.0, 0.4, 1.0, grid, 24);
  const double finer = regularity_integral(kPower, 1.0, 0.4, 1.0, grid, 48);
  EXPECT_LE(std::abs(fine - coarse) / fine, 0.1);
  EXPECT_LE(std::abs(finer - fine) / finer, 0.1);
}

GTEST_TEST(RegularityIntegralTest, WeightedStableUnweightedGrows) {
  Grid grid = build_grid(kPower, 200, 20.0, 2.0);
  std::vector<double> weighted, flat;
  for (int level = 0; level < 3; ++level) {
    weighted.push_back(regularity_integral(kPower, 1.0, 0.4, 1.0, grid));
    flat.push_back(regularity_integral(kUnit, 1.0, 0.4, 1.0, grid));
    grid = space::refine(grid);
  }
  for (int k = 1; k < 3; ++k) {
    EXPECT_LE(std::abs(weighted[k] / weighted[k - 1] - 1.0), 0.1);
    EXPECT_GE(flat[k] / flat[k - 1], 1.25);
  }
}

GTEST_TEST(GammaIntegralTest, IntegrandIdentity) {
  const Grid grid = build_grid(kPower, 150, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const BoundaryInput bi = boundary_input(a, grid, 1.0, 0.6);
  const LinOp rest = fractional_power(a, 1.0, 0.4);
  for (double s : {1e-4, 1e-2, 0.5}) {
    const Eigen::VectorXd v = rest.apply(semigroup_matrix(a, s).apply(bi.e_ortho));
    EXPECT_NEAR(gamma_integrand(bi, a, s), v.squaredNorm(), 1e-8 * v.squaredNorm());
  }
}

GTEST_TEST(GammaIntegralTest, GammaZeroMatchesTimeQuadrature) {
  const Grid grid = build_grid(kPower, 150, 20.0, 2.0);
  const LinOp a = dirichlet_laplacian(grid);
  const BoundaryInput bi = boundary_input(a, grid, 1.0, 0.6);
  const SpectralFactor& f = a.spectral();
  // Exact modal integral of |e^{sA} b|^2 over (0, 1).
  const Eigen::VectorXd c = f.basis_inv * bi.b_ortho;
  const Eigen::MatrixXd gram_modes = f.basis.transpose() * f.basis;
  double exact = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    for (Eigen::Index j = 0; j < c.size(); ++j) {
      const double k = f.kappa[i] + f.kappa[j];
      exact += c[i] * c[j] * gram_modes(i, j) * -std::expm1(-k) / k;
    }
  }
  EXPECT_NEAR(gamma_integral(bi, a, 0.0, 1.0), exact, 1e-3 * exact);
}

GTEST_TEST(GammaIntegralTest, StableBelowCriticalExponent) {
  Grid grid = build_grid(kPower, 200, 20.0, 2.0);
  std::vector<double> values;
  for (int level = 0; level < 3; ++level) {
    const LinOp a = dirichlet_laplacian(grid);
    const BoundaryInput bi = boundary_input(a, grid, 1.0, 0.6);
    values.push_back(gamma_integral(bi, a, 0.15, 1.0));
    grid = space::refine(grid);
  }
  EXPECT_LE(std::abs(values[2] / values[1] - 1.0), std::abs(values[1] / values[0] - 1.0) + 0.02);
  EXPECT_LE(std::abs(values[2] / values[1] - 1.0), 0.1);
}

}  // namespace
}  // namespace ops
}  // namespace halfline
