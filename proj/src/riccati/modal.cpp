#include "modal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "halfline/errors.hpp"

namespace halfline::riccati {
namespace detail {
namespace {

double factorial(int k) {
  double f = 1.0;
  for (int j = 2; j <= k; ++j) f *= j;
  return f;
}

// Largest singular value of a matrix given only through its action and the
// action of its transpose, warm-started from (and updating) `v`.
template <class Apply, class ApplyT>
double power_norm(Apply&& apply, ApplyT&& apply_t, Eigen::VectorXd& v) {
  if (v.norm() == 0.0) v.setOnes();
  v.normalize();
  // Keep the warm start from collapsing onto a null direction of a later matrix.
  v.array() += 1e-3 / std::sqrt(static_cast<double>(v.size()));
  v.normalize();
  double estimate = 0.0;
  for (int iter = 0; iter < 2000; ++iter) {
    const Eigen::VectorXd av = apply(v);
    Eigen::VectorXd next = apply_t(av);
    const double value = std::sqrt(next.norm());
    if (value == 0.0) return 0.0;
    next.normalize();
    v = next;
    if (std::abs(value - estimate) <= 1e-10 * value) return value;
    estimate = value;
  }
  return estimate;
}

}  // namespace

double phi(int k, double z) {
  if (std::abs(z) < 0.5) {
    double term = 1.0 / factorial(k);
    double sum = term;
    for (int j = 1; j < 30; ++j) {
      term *= z / (j + k);
      sum += term;
    }
    return sum;
  }
  double value = std::exp(z);
  for (int j = 1; j <= k; ++j) value = (value - 1.0 / factorial(j - 1)) / z;
  return value;
}

Eigen::MatrixXd elementwise(const Eigen::MatrixXd& z, int k, double scale) {
  return z.unaryExpr([k, scale](double x) { return scale * phi(k, x); });
}

ModalProblem make_modal_problem(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                const CostSpec& cost, double tau, double T, int m) {
  if (generator.grid_id() != bi.grid_id) {
    throw DimensionError("riccati: boundary input and generator live on different grids");
  }
  if (bi.e_ortho.size() != generator.size()) {
    throw DimensionError("riccati: boundary input has the wrong length");
  }
  cost.validate(generator);
  if (!std::isfinite(tau) || !std::isfinite(T) || !(T > tau)) {
    throw ConfigError("riccati: need finite tau < T");
  }
  if (m < 50) throw ConfigError("riccati: m must be at least 50, got " + std::to_string(m));

  ModalProblem p;
  p.factor = ops::spectral_factor(generator);
  const ops::SpectralFactor& f = *p.factor;
  const Eigen::Index n = f.size();
  p.tau = tau;
  p.horizon = T;
  p.m = m;
  p.h = (T - tau) / m;
  p.K = f.kappa.replicate(1, n) + f.kappa.transpose().replicate(n, 1);
  const Eigen::MatrixXd CS = cost.C_op.matrix() * f.basis;
  p.C_hat = CS.transpose() * CS;
  p.G_hat = f.basis.transpose() * cost.G_op.matrix() * f.basis;
  p.G_hat = 0.5 * (p.G_hat + p.G_hat.transpose());
  const double lambda0 = bi.lambda0;
  const double rest = 1.0 - bi.alpha;
  p.w = f.apply_function([=](double k) { return std::pow(lambda0 + k, rest); }, bi.e_ortho);
  p.c = f.basis_inv * p.w;

  const Eigen::MatrixXd z = -p.h * p.K;
  p.decay = z.array().exp();
  p.h_phi1 = elementwise(z, 1, p.h);
  const Eigen::MatrixXd phi2 = elementwise(z, 2, 1.0);
  const Eigen::MatrixXd phi3 = elementwise(z, 3, 1.0);
  p.h2_phi2 = p.h * p.h * phi2;
  p.h2_phi3 = p.h * p.h * phi3;
  p.h2_phi2_3 = p.h2_phi2 - p.h2_phi3;
  p.scale = p.G_hat.norm() + (T - tau) * p.C_hat.norm();
  return p;
}

SolutionBuilder::SolutionBuilder(const ModalProblem& problem, const ops::BoundaryInput& bi,
                                 const CostSpec& cost, std::uint64_t grid_id)
    : problem_(problem), G_(cost.G_op.matrix()) {
  out_.tau = problem.tau;
  out_.horizon = problem.horizon;
  out_.lambda0 = bi.lambda0;
  out_.alpha = bi.alpha;
  out_.grid_id = grid_id;
  const auto count = static_cast<std::size_t>(problem.m) + 1;
  out_.times.reserve(count);
  out_.P_mats.reserve(count);
  out_.gain_cache.reserve(count);
  out_.trace_integrand.reserve(count);
  out_.trace_increments.reserve(count - 1);
}

void SolutionBuilder::push(const Eigen::MatrixXd& P_hat) {
  const ModalProblem& p = problem_;
  const ops::SpectralFactor& f = *p.factor;
  const std::size_t k = out_.times.size();
  if (k > static_cast<std::size_t>(p.m)) throw NumericError("riccati: too many samples");
  out_.times.push_back(k == static_cast<std::size_t>(p.m)
                           ? p.tau
                           : p.horizon - static_cast<double>(k) * p.h);

  if (k == 0) {
    out_.P_mats.push_back(G_);
  } else {
    Eigen::MatrixXd P = f.basis_inv.transpose() * P_hat * f.basis_inv;
    out_.P_mats.push_back(0.5 * (P + P.transpose()));
  }
  const Eigen::VectorXd g = P_hat * p.c;
  out_.gain_cache.push_back((f.basis_inv.transpose() * g).transpose());
  out_.trace_integrand.push_back(p.c.dot(g));

  if (k > 0) {
    // Variation of constants over one step with the quadratic term linear in r.
    const Eigen::VectorXd cg0 = p.c.cwiseProduct(previous_g_);
    const Eigen::VectorXd cg1 = p.c.cwiseProduct(g);
    const double increment = p.c.dot(p.h_phi1.cwiseProduct(previous_hat_) * p.c) +
                             p.c.dot(p.h2_phi2.cwiseProduct(p.C_hat) * p.c) -
                             cg0.dot(p.h2_phi2_3 * cg0) - cg1.dot(p.h2_phi3 * cg1);
    out_.trace_increments.push_back(increment);
  }
  previous_hat_ = P_hat;
  previous_g_ = g;
}

RiccatiSolution SolutionBuilder::finish() {
  if (out_.times.size() != static_cast<std::size_t>(problem_.m) + 1) {
    throw NumericError("riccati: incomplete solution");
  }
  previous_hat_.resize(0, 0);
  const ops::SpectralFactor& f = *problem_.factor;
  const double lambda0 = out_.lambda0;
  const double rest = 1.0 - out_.alpha;
  auto power = [=](double k) { return std::pow(lambda0 + k, rest); };

  AlphaNormReport& report = out_.alpha_norm_report;
  const Eigen::Index n = f.size();
  Eigen::VectorXd v_sym = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd v_sing = Eigen::VectorXd::Ones(n);
  for (std::size_t k = 0; k < out_.P_mats.size(); ++k) {
    const Eigen::MatrixXd& P = out_.P_mats[k];
    report.sup_norm = std::max(
        report.sup_norm,
        power_norm([&](const Eigen::VectorXd& x) { return Eigen::VectorXd(P * x); },
                   [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(P * x); }, v_sym));
    const double r = out_.horizon - out_.times[k];
    if (r <= 0.0) continue;
    // V_P = (lambda0 - A*)^{1-alpha} P and V_P^T = P (lambda0 - A)^{1-alpha}.
    const double singular = power_norm(
        [&](const Eigen::VectorXd& x) {
          return f.apply_function_transposed(power, Eigen::VectorXd(P * x));
        },
        [&](const Eigen::VectorXd& y) {
          return Eigen::VectorXd(P * f.apply_function(power, y));
        },
        v_sing);
    const double weighted = std::pow(r, rest) * singular;
    report.sup_singular = std::max(report.sup_singular, weighted);
    if (k == 1) report.endpoint_singular = weighted;
  }
  return std::move(out_);
}

}  // namespace detail

void CostSpec::validate(const ops::LinOp& generator) const {
  const Eigen::Index n = generator.size();
  if (C_op.grid_id() != generator.grid_id() || G_op.grid_id() != generator.grid_id()) {
    throw DimensionError("cost operators live on a different grid than the generator");
  }
  if (C_op.matrix().cols() != n || G_op.matrix().rows() != n || G_op.matrix().cols() != n) {
    throw DimensionError("cost operators have the wrong size");
  }
  const Eigen::MatrixXd& G = G_op.matrix();
  if (!G.allFinite() || !C_op.matrix().allFinite()) {
    throw ConfigError("cost operators contain non-finite entries");
  }
  if ((G - G.transpose()).norm() > 1e-12 * std::max(1.0, G.norm())) {
    throw ConfigError("terminal weight G must be symmetric");
  }
  if (G.norm() > 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(G, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-10) {
      throw ConfigError("terminal weight G must be positive semidefinite");
    }
  }
}

CostSpec default_cost(const ops::LinOp& generator) {
  return {ops::LinOp::identity(generator.size(), generator.grid_id()),
          ops::LinOp::zero(generator.size(), generator.grid_id())};
}

CostSpec zero_cost(const ops::LinOp& generator) {
  return {ops::LinOp::zero(generator.size(), generator.grid_id()),
          ops::LinOp::zero(generator.size(), generator.grid_id())};
}

namespace {

// Position of t on the decreasing time grid: index k and weight theta with
// t = (1 - theta) times[k] + theta times[k + 1].
std::pair<std::size_t, double> locate(const RiccatiSolution& P, double t) {
  if (P.times.size() < 2) throw NumericError("riccati solution is empty");
  const double slack = 1e-12 * std::max(1.0, std::abs(P.horizon));
  if (!(t >= P.tau - slack && t <= P.horizon + slack)) {
    throw DomainError("time " + std::to_string(t) + " outside [" + std::to_string(P.tau) +
                      ", " + std::to_string(P.horizon) + "]");
  }
  const double r = std::clamp((P.horizon - t) / P.step(), 0.0, static_cast<double>(P.steps()));
  auto k = static_cast<std::size_t>(std::floor(r));
  if (k >= P.steps()) k = P.steps() - 1;
  return {k, r - static_cast<double>(k)};
}

}  // namespace

Eigen::RowVectorXd RiccatiSolution::gain(double t) const {
  const auto [k, theta] = locate(*this, t);
  if (theta == 0.0) return gain_cache[k];
  return (1.0 - theta) * gain_cache[k] + theta * gain_cache[k + 1];
}

Eigen::MatrixXd RiccatiSolution::P_at(double t) const {
  const auto [k, theta] = locate(*this, t);
  if (theta == 0.0) return P_mats[k];
  return (1.0 - theta) * P_mats[k] + theta * P_mats[k + 1];
}

Eigen::RowVectorXd gain(const RiccatiSolution& P, double t) { return P.gain(t); }

double trace_term(const RiccatiSolution& P, const ops::BoundaryInput& bi, double coeff,
                  double tau, double T) {
  if (coeff != 0.5 && coeff != 1.0) {
    throw ConfigError("trace coefficient must be 0.5 or 1, got " + std::to_string(coeff));
  }
  if (bi.grid_id != P.grid_id) throw DimensionError("trace_term: grid mismatch");
  if (!(T >= tau)) throw DomainError("trace_term: need tau <= T");
  if (T == tau) return 0.0;
  const auto [k_hi, th_hi] = locate(P, T);
  const auto [k_lo, th_lo] = locate(P, tau);
  const double h = P.step();
  auto integrand_at = [&](std::size_t k, double theta) {
    return (1.0 - theta) * P.trace_integrand[k] + theta * P.trace_integrand[k + 1];
  };
  // Whole steps use the cached exact increments; fractional ends fall back to
  // the trapezoidal rule on the interpolated integrand.
  double total = 0.0;
  if (k_hi == k_lo) {
    total = 0.5 * (integrand_at(k_hi, th_hi) + integrand_at(k_lo, th_lo)) * (T - tau);
    return coeff * total;
  }
  std::size_t first = k_hi;
  if (th_hi > 0.0) {
    total += 0.5 * (integrand_at(k_hi, th_hi) + P.trace_integrand[k_hi + 1]) *
             (1.0 - th_hi) * h;
    first = k_hi + 1;
  }
  for (std::size_t k = first; k < k_lo; ++k) total += P.trace_increments[k];
  if (th_lo > 0.0) {
    total += 0.5 * (P.trace_integrand[k_lo] + integrand_at(k_lo, th_lo)) * th_lo * h;
  }
  return coeff * total;
}

std::vector<double> pointwise_relative_difference(const RiccatiSolution& P,
                                                  const RiccatiSolution& Q) {
  if (P.P_mats.size() != Q.P_mats.size()) {
    throw DimensionError("riccati solutions have different time grids");
  }
  std::vector<double> out(P.P_mats.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double scale = Q.P_mats[k].norm();
    const double diff = (P.P_mats[k] - Q.P_mats[k]).norm();
    out[k] = scale > 0.0 ? diff / scale : diff;
  }
  return out;
}

double max_relative_difference(const RiccatiSolution& P, const RiccatiSolution& Q) {
  if (P.P_mats.size() != Q.P_mats.size()) {
    throw DimensionError("riccati solutions have different time grids");
  }
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < P.P_mats.size(); ++k) {
    diff = std::max(diff, (P.P_mats[k] - Q.P_mats[k]).norm());
    scale = std::max(scale, Q.P_mats[k].norm());
  }
  return scale > 0.0 ? diff / scale : diff;
}

FlowDiagnostics flow_diagnostics(const RiccatiSolution& P, const CostSpec& cost) {
  FlowDiagnostics d;
  d.min_eigenvalue = INFINITY;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  for (const Eigen::MatrixXd& Pk : P.P_mats) {
    const double size = std::max(1.0, Pk.cwiseAbs().maxCoeff());
    d.max_asymmetry = std::max(d.max_asymmetry, (Pk - Pk.transpose()).cwiseAbs().maxCoeff() / size);
    solver.compute(Pk, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = std::min(d.min_eigenvalue, solver.eigenvalues().minCoeff());
  }
  d.terminal_mismatch = (P.P_mats.front() - cost.G_op.matrix()).cwiseAbs().maxCoeff();
  return d;
}

}  // namespace halfline::riccati
