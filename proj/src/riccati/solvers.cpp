#include <cmath>
#include <sstream>
#include <string>

#include "halfline/errors.hpp"
#include "modal.hpp"

namespace halfline::riccati {

using detail::ModalProblem;

namespace {

void check_growth(const Eigen::MatrixXd& P_hat, const ModalProblem& p, double t,
                  const char* solver) {
  const double size = P_hat.norm();
  if (!std::isfinite(size) || size > 1e6 * std::max(p.scale, 1e-300)) {
    std::ostringstream msg;
    msg << solver << ": solution norm exploded near t = " << t
        << "; reduce the step size (increase m)";
    throw NumericError(msg.str());
  }
}

}  // namespace

RiccatiSolution solve_riccati_ode(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                  const CostSpec& cost, double tau, double T, int m) {
  const ModalProblem p = detail::make_modal_problem(generator, bi, cost, tau, T, m);
  const double h = p.h;
  const Eigen::MatrixXd z = -h * p.K;

  // Cox-Matthews exponential RK4 with the Lyapunov part integrated exactly.
  const Eigen::MatrixXd half_decay = (0.5 * z).array().exp();
  const Eigen::MatrixXd half_phi1 = detail::elementwise(0.5 * z, 1, 0.5 * h);
  const Eigen::MatrixXd phi1 = detail::elementwise(z, 1, 1.0);
  const Eigen::MatrixXd phi2 = detail::elementwise(z, 2, 1.0);
  const Eigen::MatrixXd phi3 = detail::elementwise(z, 3, 1.0);
  const Eigen::MatrixXd w1 = h * (phi1 - 3.0 * phi2 + 4.0 * phi3);
  const Eigen::MatrixXd w23 = h * (2.0 * phi2 - 4.0 * phi3);
  const Eigen::MatrixXd w4 = h * (4.0 * phi3 - phi2);

  auto rhs = [&](const Eigen::MatrixXd& X) {
    const Eigen::VectorXd g = X * p.c;
    return Eigen::MatrixXd(p.C_hat - g * g.transpose());
  };

  detail::SolutionBuilder builder(p, bi, cost, generator.grid_id());
  Eigen::MatrixXd X = p.G_hat;
  builder.push(X);
  for (int k = 0; k < m; ++k) {
    const Eigen::MatrixXd n0 = rhs(X);
    const Eigen::MatrixXd a = half_decay.cwiseProduct(X) + half_phi1.cwiseProduct(n0);
    const Eigen::MatrixXd na = rhs(a);
    const Eigen::MatrixXd b = half_decay.cwiseProduct(X) + half_phi1.cwiseProduct(na);
    const Eigen::MatrixXd nb = rhs(b);
    const Eigen::MatrixXd c =
        half_decay.cwiseProduct(a) + half_phi1.cwiseProduct(2.0 * nb - n0);
    const Eigen::MatrixXd nc = rhs(c);
    X = p.decay.cwiseProduct(X) + w1.cwiseProduct(n0) + w23.cwiseProduct(na + nb) +
        w4.cwiseProduct(nc);
    X = 0.5 * (X + X.transpose()).eval();
    check_growth(X, p, T - (k + 1) * h, "solve_riccati_ode");
    builder.push(X);
  }
  RiccatiSolution out = builder.finish();
  return out;
}

RiccatiSolution solve_riccati_mild(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                   const CostSpec& cost, double tau, double T, int m,
                                   int max_iter, double tol) {
  if (!(tol > 0.0)) throw ConfigError("solve_riccati_mild: tol must be positive");
  if (max_iter < 1) throw ConfigError("solve_riccati_mild: max_iter must be positive");
  const ModalProblem p = detail::make_modal_problem(generator, bi, cost, tau, T, m);
  const Eigen::Index n = p.c.size();
  const auto count = static_cast<std::size_t>(m) + 1;

  // Product trapezoid for the quadratic integral: over one step the data
  // F = (Ph c)(Ph c)^T of the previous iterate is interpolated linearly.
  const Eigen::MatrixXd lead = p.h * (detail::elementwise(-p.h * p.K, 1, 1.0) -
                                      detail::elementwise(-p.h * p.K, 2, 1.0));
  const Eigen::MatrixXd trail = detail::elementwise(-p.h * p.K, 2, p.h);
  const Eigen::MatrixXd source = p.h_phi1.cwiseProduct(p.C_hat);

  std::vector<Eigen::MatrixXd> iterate(count, Eigen::MatrixXd::Zero(n, n));
  std::vector<Eigen::VectorXd> g_old(count, Eigen::VectorXd::Zero(n));
  std::vector<Eigen::VectorXd> g_new(count);
  int iterations = 0;
  double residual = INFINITY;
  for (int iter = 1; iter <= max_iter; ++iter) {
    iterations = iter;
    double diff = 0.0;
    double size = 0.0;
    Eigen::MatrixXd X = p.G_hat;
    for (std::size_t k = 0; k < count; ++k) {
      if (k > 0) {
        const Eigen::VectorXd& g0 = g_old[k - 1];
        const Eigen::VectorXd& g1 = g_old[k];
        X = p.decay.cwiseProduct(X) + source -
            lead.cwiseProduct(g0 * g0.transpose()) - trail.cwiseProduct(g1 * g1.transpose());
        check_growth(X, p, T - static_cast<double>(k) * p.h, "solve_riccati_mild");
      }
      diff = std::max(diff, (X - iterate[k]).norm());
      size = std::max(size, X.norm());
      iterate[k] = X;
      g_new[k] = X * p.c;
    }
    std::swap(g_old, g_new);
    residual = size > 0.0 ? diff / size : diff;
    if (diff == 0.0 || residual <= tol) break;
    if (iter == max_iter) {
      std::ostringstream msg;
      msg << "solve_riccati_mild: no convergence after " << max_iter
          << " iterations, last relative update " << residual;
      throw NumericError(msg.str());
    }
  }

  detail::SolutionBuilder builder(p, bi, cost, generator.grid_id());
  for (std::size_t k = 0; k < count; ++k) {
    builder.push(iterate[k]);
    iterate[k].resize(0, 0);
  }
  RiccatiSolution out = builder.finish();
  out.iterations = iterations;
  out.final_residual = residual;
  return out;
}

}  // namespace halfline::riccati
