#pragma once

#include <vector>

#include <Eigen/Dense>

#include "halfline/operators.hpp"

namespace halfline::riccati {

/// Quadratic cost data in orthonormalized coordinates: running cost |C x|^2
/// and terminal cost <G x, x>.
struct CostSpec {
  ops::LinOp C_op;
  ops::LinOp G_op;

  // Throws DimensionError on grid or size mismatch with `generator`, ConfigError
  // unless G is symmetric (1e-12 relative) with eigenvalues >= -1e-10.
  void validate(const ops::LinOp& generator) const;
};

// C = I, G = 0.
CostSpec default_cost(const ops::LinOp& generator);
// C = 0, G = 0.
CostSpec zero_cost(const ops::LinOp& generator);

struct AlphaNormReport {
  double sup_norm = 0.0;          // sup_t |P(t)|
  double sup_singular = 0.0;      // sup_t (T - t)^{1-alpha} |(lambda0 - A*)^{1-alpha} P(t)|
  double endpoint_singular = 0.0; // the same product at the sample next to T
};

/// Time-sampled solution of the Riccati equation on [tau, T].
struct RiccatiSolution {
  std::vector<double> times;                    // times[0] = T, decreasing to tau
  std::vector<Eigen::MatrixXd> P_mats;          // orthonormalized coordinates
  std::vector<Eigen::RowVectorXd> gain_cache;   // E* V_P(t_k)
  std::vector<double> trace_integrand;          // <b, P(t_k) b>
  // Integral of <b, P(s) b> over [times[k+1], times[k]], exact in the linear
  // part of the flow within each step.
  std::vector<double> trace_increments;
  AlphaNormReport alpha_norm_report;
  double tau = 0.0;
  double horizon = 0.0;
  double lambda0 = 1.0;
  double alpha = 0.6;
  std::uint64_t grid_id = 0;
  int iterations = 0;          // Picard iterations; 0 for the differential solver
  double final_residual = 0.0; // last Picard update, relative

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double step() const { return (horizon - tau) / static_cast<double>(steps()); }

  /// Row vector g with u* = -g x, linearly interpolated in t. Throws
  /// DomainError outside [tau, T].
  Eigen::RowVectorXd gain(double t) const;
  /// P(t) by linear interpolation between samples.
  Eigen::MatrixXd P_at(double t) const;
};

/// Backward integration of the weak form from P(T) = G with a fourth-order
/// exponential Runge-Kutta scheme on m uniform steps.
RiccatiSolution solve_riccati_ode(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                  const CostSpec& cost, double tau, double T, int m);

/// Picard iteration on the mild form from P = 0, time integrals by product
/// trapezoidal quadrature on the same m-step grid. Stops when the relative
/// sup-in-time update falls below tol; throws NumericError after max_iter.
RiccatiSolution solve_riccati_mild(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                   const CostSpec& cost, double tau, double T, int m,
                                   int max_iter, double tol);

Eigen::RowVectorXd gain(const RiccatiSolution& P, double t);

/// coeff times the integral of <b, P(s) b> over [tau, T]; coeff must be 1/2 or 1.
/// [tau, T] must lie within the solution's interval.
double trace_term(const RiccatiSolution& P, const ops::BoundaryInput& bi, double coeff,
                  double tau, double T);

/// sup_k |P_k - Q_k|_F / sup_k |Q_k|_F over matching time grids.
double max_relative_difference(const RiccatiSolution& P, const RiccatiSolution& Q);
/// |P_k - Q_k|_F / |Q_k|_F per sample (0 where both vanish).
std::vector<double> pointwise_relative_difference(const RiccatiSolution& P,
                                                  const RiccatiSolution& Q);

struct FlowDiagnostics {
  double max_asymmetry = 0.0;      // max_k |P_k - P_k^T|_max / max(1, |P_k|_max)
  double min_eigenvalue = 0.0;     // min_k lambda_min(P_k)
  double terminal_mismatch = 0.0;  // |P(T) - G|_max
};

FlowDiagnostics flow_diagnostics(const RiccatiSolution& P, const CostSpec& cost);

}  // namespace halfline::riccati
