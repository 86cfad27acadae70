#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "halfline/operators.hpp"
#include "halfline/riccati.hpp"
#include "halfline/stochastic.hpp"
#include "halfline/weighted_space.hpp"

namespace halfline::lq {

/// Named analytic profile evaluated on the grid nodes.
struct Profile {
  enum class Kind { zero, constant, gaussian_bump, exponential };
  Kind kind = Kind::zero;
  double scale = 1.0;
  double center = 2.0;  // gaussian_bump
  double width = 0.5;   // gaussian_bump
  double mu = 1.0;      // exponential: e^{-mu xi}

  void validate(const std::string& field) const;
  Eigen::VectorXd evaluate(const space::Grid& grid) const;
};

const char* to_string(Profile::Kind kind);
Profile::Kind profile_kind_from_string(const std::string& name, const std::string& field);

/// Observation or terminal operator: identity, zero, or multiplication by a profile.
struct OperatorChoice {
  enum class Kind { identity, zero, multiplication };
  Kind kind = Kind::identity;
  Profile profile;
};

struct ProblemConfig {
  space::WeightSpec weight;
  std::size_t n = 200;
  double xi_max = 20.0;
  double clustering = 2.0;
  double lambda0 = 1.0;
  double alpha = 0.6;
  double tau = 0.0;
  double horizon = 1.0;
  OperatorChoice observation{OperatorChoice::Kind::identity, {}};
  OperatorChoice terminal{OperatorChoice::Kind::zero, {}};
  double trace_coeff = 1.0;
  int riccati_steps = 400;
  stochastic::NoiseConfig noise{0, 10000, 200, 0.0, 1.0, true};
  Profile x0{Profile::Kind::gaussian_bump, 1.0, 2.0, 0.5, 1.0};
  std::vector<double> x0_nodal;  // overrides the profile when nonempty

  // Throws ConfigError naming the offending field.
  void validate() const;
};

/// Everything assembled from a ProblemConfig.
struct Problem {
  ProblemConfig config;
  space::Grid grid;
  space::Gram gram;
  ops::LinOp generator;
  ops::BoundaryInput bi;
  riccati::CostSpec cost;
  Eigen::VectorXd x0;  // nodal
  bool observation_is_identity = true;
  bool terminal_is_zero = true;
};

Problem build_problem(const ProblemConfig& config);

/// Options that make a simulation record exactly what the cost needs.
stochastic::SimulationOptions cost_options(const Problem& problem,
                                           const riccati::RiccatiSolution* readout,
                                           unsigned workers);

struct CostEstimate {
  double J_estimate = 0.0;
  double J_stderr = 0.0;
  Eigen::VectorXd per_path;
};

/// Per-path trapezoidal quadrature of |C x|^2 plus the exact integral of the
/// held control, plus the terminal form; ensemble mean and standard error.
/// The ensemble must have been produced with cost_options of the same problem.
CostEstimate evaluate_cost(const stochastic::TrajectoryEnsemble& ens,
                           const riccati::CostSpec& cost, const space::Gram& gram);

/// Per path: integral of |u + gain x|^2, trapezoidal in the state with the
/// control held over each step. Needs an ensemble with a readout.
Eigen::VectorXd quadratic_term_per_path(const stochastic::TrajectoryEnsemble& ens);

/// <P(tau) x0, x0>_H + trace_term(P, bi, coeff, tau, T).
double value_function(const riccati::RiccatiSolution& P, const ops::BoundaryInput& bi,
                      const Eigen::VectorXd& x0, const ProblemConfig& cfg,
                      const space::Gram& gram);

struct CostReport {
  double J_estimate = 0.0;
  double J_stderr = 0.0;
  double quadratic_term = 0.0;  // E integral |u + E* V_P x|^2
  double identity_residual = 0.0;  // for cfg.trace_coeff, relative
  double value_analytic = 0.0;     // value_function with cfg.trace_coeff
  double initial_form = 0.0;       // <P(tau) x0, x0>
  double trace_one = 0.0;          // trace term with coefficient 1
  double rhs_half = 0.0;
  double rhs_one = 0.0;
  double residual_half = 0.0;      // (lhs - rhs) / max(1, |lhs|)
  double residual_one = 0.0;
  double combined_stderr = 0.0;    // stderr of the per-path lhs - quadratic term
  double gap_half = 0.0;           // lhs - rhs, absolute
  double gap_one = 0.0;
};

CostReport fundamental_identity_residual(const riccati::RiccatiSolution& P,
                                         const Problem& problem,
                                         const stochastic::TrajectoryEnsemble& ens);

/// Candidates (1/2, 1) whose absolute gap lies within `k` combined standard errors.
struct CoefficientVerdict {
  bool half_consistent = false;
  bool one_consistent = false;
};
CoefficientVerdict coefficient_verdict(const CostReport& report, double k = 3.0);

/// Smooth random perturbation: a seeded combination of the first `modes`
/// Fourier modes on [tau, T], sampled at the step midpoints.
std::vector<double> band_limited_perturbation(std::uint64_t seed, std::size_t index,
                                              std::size_t n_steps, int modes,
                                              double amplitude);

struct OptimalityRow {
  double gap = 0.0;             // mean J(u* + delta) - J(u*)
  double paired_stderr = 0.0;
  double predicted_gap = 0.0;   // mean of the identity's quadratic prediction
  double prediction_stderr = 0.0;  // stderr of gap - prediction
  bool nonnegative = false;     // gap >= -3 paired_stderr
  bool matches_prediction = false;
};

struct OptimalityReport {
  CostEstimate optimal;
  std::vector<OptimalityRow> rows;
};

/// Simulates u* and u* + delta (delta added to the recorded optimal control
/// process) with common random numbers.
OptimalityReport optimality_check(const riccati::RiccatiSolution& P, const Problem& problem,
                                  const std::vector<std::vector<double>>& deltas,
                                  unsigned workers);

}  // namespace halfline::lq
