#include <cmath>
#include <sstream>
#include <string>

#include "halfline/errors.hpp"
#include "halfline/lq_control.hpp"

namespace halfline::lq {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

Eigen::MatrixXd operator_matrix(const OperatorChoice& choice, const space::Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  switch (choice.kind) {
    case OperatorChoice::Kind::identity:
      return Eigen::MatrixXd::Identity(n, n);
    case OperatorChoice::Kind::zero:
      return Eigen::MatrixXd::Zero(n, n);
    case OperatorChoice::Kind::multiplication:
      // Multiplication operators are diagonal in nodal and orthonormalized coordinates alike.
      return choice.profile.evaluate(grid).asDiagonal();
  }
  return Eigen::MatrixXd();
}

}  // namespace

const char* to_string(Profile::Kind kind) {
  switch (kind) {
    case Profile::Kind::zero:
      return "zero";
    case Profile::Kind::constant:
      return "constant";
    case Profile::Kind::gaussian_bump:
      return "gaussian_bump";
    case Profile::Kind::exponential:
      return "exponential";
  }
  return "unknown";
}

Profile::Kind profile_kind_from_string(const std::string& name, const std::string& field) {
  if (name == "zero") return Profile::Kind::zero;
  if (name == "constant") return Profile::Kind::constant;
  if (name == "gaussian_bump") return Profile::Kind::gaussian_bump;
  if (name == "exponential") return Profile::Kind::exponential;
  throw ConfigError(field + " must be one of zero, constant, gaussian_bump, exponential; got '" +
                    name + "'");
}

void Profile::validate(const std::string& field) const {
  require(std::isfinite(scale), field + ".scale must be finite");
  if (kind == Kind::gaussian_bump) {
    require(std::isfinite(center) && center > 0.0, field + ".center must be positive");
    require(std::isfinite(width) && width > 0.0, field + ".width must be positive");
  }
  if (kind == Kind::exponential) {
    require(std::isfinite(mu) && mu > 0.0, field + ".mu must be positive");
  }
}

Eigen::VectorXd Profile::evaluate(const space::Grid& grid) const {
  switch (kind) {
    case Kind::zero:
      return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
    case Kind::constant:
      return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), scale);
    case Kind::gaussian_bump:
      return space::sample(grid, [this](double xi) {
        const double s = (xi - center) / width;
        return scale * std::exp(-0.5 * s * s);
      });
    case Kind::exponential:
      return space::sample(grid, [this](double xi) { return scale * std::exp(-mu * xi); });
  }
  return Eigen::VectorXd();
}

void ProblemConfig::validate() const {
  weight.validate();
  require(weight.kind != space::WeightKind::unit,
          "weight.kind must be pure_power or capped for control problems");
  require(n >= 8, "grid.n must be at least 8");
  require(std::isfinite(xi_max) && xi_max >= 5.0, "grid.xi_max must be at least 5");
  require(std::isfinite(clustering) && clustering >= 1.0, "grid.clustering must be at least 1");
  require(std::isfinite(lambda0) && lambda0 > 0.0, "lambda0 must be positive");
  if (!ops::alpha_admissible(alpha, weight)) {
    std::ostringstream msg;
    msg << "alpha must lie in (1/2, 1/2 + theta/4) = (0.5, " << 0.5 + weight.theta / 4.0 << ")";
    throw ConfigError(msg.str());
  }
  require(std::isfinite(tau) && tau >= 0.0, "tau must be finite and nonnegative");
  require(std::isfinite(horizon) && horizon > tau, "T must be larger than tau");
  require(trace_coeff == 0.5 || trace_coeff == 1.0, "trace_coeff must be 0.5 or 1");
  require(riccati_steps >= 50, "riccati.steps must be at least 50");
  if (observation.kind == OperatorChoice::Kind::multiplication) {
    observation.profile.validate("cost.C.profile");
  }
  if (terminal.kind == OperatorChoice::Kind::multiplication) {
    terminal.profile.validate("cost.G.profile");
    require(terminal.profile.scale >= 0.0, "cost.G.profile.scale must be nonnegative");
  }
  x0.validate("x0");
  if (!x0_nodal.empty()) {
    require(x0_nodal.size() == n, "x0.values must have grid.n entries");
    for (double v : x0_nodal) require(std::isfinite(v), "x0.values must be finite");
  }
  require(std::abs(noise.tau - tau) <= 1e-15 * std::max(1.0, tau) &&
              std::abs(noise.horizon - horizon) <= 1e-15 * std::max(1.0, horizon),
          "noise interval must equal [tau, T]");
  noise.validate();
}

Problem build_problem(const ProblemConfig& config) {
  config.validate();
  Problem p{config,
            space::build_grid(config.weight, config.n, config.xi_max, config.clustering),
            {}, {}, {}, {}, {}, true, true};
  p.gram = space::make_gram(p.grid);
  p.generator = ops::dirichlet_laplacian(p.grid);
  p.bi = ops::boundary_input(p.generator, p.grid, config.lambda0, config.alpha);
  const std::uint64_t id = p.grid.id();
  p.cost = {ops::LinOp(operator_matrix(config.observation, p.grid), id),
            ops::LinOp(operator_matrix(config.terminal, p.grid), id)};
  p.cost.validate(p.generator);
  p.observation_is_identity = config.observation.kind == OperatorChoice::Kind::identity;
  p.terminal_is_zero = config.terminal.kind == OperatorChoice::Kind::zero;
  if (config.x0_nodal.empty()) {
    p.x0 = config.x0.evaluate(p.grid);
  } else {
    p.x0 = Eigen::Map<const Eigen::VectorXd>(config.x0_nodal.data(),
                                             static_cast<Eigen::Index>(config.x0_nodal.size()));
  }
  return p;
}

stochastic::SimulationOptions cost_options(const Problem& problem,
                                           const riccati::RiccatiSolution* readout,
                                           unsigned workers) {
  stochastic::SimulationOptions options;
  options.observation = problem.observation_is_identity ? nullptr : &problem.cost.C_op.matrix();
  options.terminal = problem.terminal_is_zero ? nullptr : &problem.cost.G_op.matrix();
  options.readout = readout;
  options.workers = workers;
  return options;
}

}  // namespace halfline::lq
