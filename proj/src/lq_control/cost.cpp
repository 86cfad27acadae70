#include <algorithm>
#include <cmath>
#include <numbers>

#include "halfline/errors.hpp"
#include "halfline/lq_control.hpp"

namespace halfline::lq {
namespace {

struct MeanStderr {
  double mean = 0.0;
  double stderr = 0.0;
};

MeanStderr mean_stderr(const Eigen::VectorXd& v) {
  MeanStderr out;
  const auto count = v.size();
  if (count == 0) return out;
  out.mean = v.mean();
  if (count > 1) {
    const double var = (v.array() - out.mean).square().sum() / static_cast<double>(count - 1);
    out.stderr = std::sqrt(var / static_cast<double>(count));
  }
  return out;
}

void check_ensemble(const stochastic::TrajectoryEnsemble& ens) {
  if (ens.n_paths() == 0 || ens.n_steps() == 0) {
    throw DimensionError("cost: empty ensemble");
  }
  if (ens.observed_sq.rows() != ens.controls.rows() ||
      ens.observed_sq.cols() != ens.controls.cols() ||
      ens.terminal_form.size() != ens.controls.rows()) {
    throw DimensionError("cost: ensemble records are inconsistent");
  }
}

}  // namespace

CostEstimate evaluate_cost(const stochastic::TrajectoryEnsemble& ens,
                           const riccati::CostSpec& cost, const space::Gram& gram) {
  check_ensemble(ens);
  if (cost.C_op.grid_id() != ens.grid_id || gram.grid_id != ens.grid_id) {
    throw DimensionError("evaluate_cost: cost and ensemble live on different grids");
  }
  const auto N = static_cast<Eigen::Index>(ens.n_steps());
  const double dt = ens.dt;
  CostEstimate out;
  out.per_path.resize(ens.controls.rows());
  for (Eigen::Index p = 0; p < ens.controls.rows(); ++p) {
    const auto obs = ens.observed_sq.row(p);
    const double state = dt * (obs.segment(0, N).sum() + obs.segment(1, N).sum()) / 2.0;
    const double control = dt * ens.controls.row(p).head(N).squaredNorm();
    out.per_path[p] = state + control + ens.terminal_form[p];
  }
  const MeanStderr ms = mean_stderr(out.per_path);
  out.J_estimate = ms.mean;
  out.J_stderr = ms.stderr;
  return out;
}

Eigen::VectorXd quadratic_term_per_path(const stochastic::TrajectoryEnsemble& ens) {
  check_ensemble(ens);
  if (ens.readout.rows() != ens.controls.rows() || ens.readout.cols() != ens.controls.cols()) {
    throw DimensionError("quadratic_term_per_path: ensemble was simulated without a readout");
  }
  const auto N = static_cast<Eigen::Index>(ens.n_steps());
  Eigen::VectorXd out(ens.controls.rows());
  for (Eigen::Index p = 0; p < out.size(); ++p) {
    const auto u = ens.controls.row(p).head(N).array();
    const auto left = u + ens.readout.row(p).segment(0, N).array();
    const auto right = u + ens.readout.row(p).segment(1, N).array();
    out[p] = ens.dt * (left.square().sum() + right.square().sum()) / 2.0;
  }
  return out;
}

double value_function(const riccati::RiccatiSolution& P, const ops::BoundaryInput& bi,
                      const Eigen::VectorXd& x0, const ProblemConfig& cfg,
                      const space::Gram& gram) {
  if (P.grid_id != gram.grid_id) {
    throw DimensionError("value_function: Riccati solution and Gram live on different grids");
  }
  const Eigen::VectorXd y0 = space::to_ortho(x0, gram);
  const double initial = y0.dot(P.P_at(cfg.tau) * y0);
  if (cfg.tau >= cfg.horizon) return initial;
  return initial + riccati::trace_term(P, bi, cfg.trace_coeff, cfg.tau, cfg.horizon);
}

CostReport fundamental_identity_residual(const riccati::RiccatiSolution& P,
                                         const Problem& problem,
                                         const stochastic::TrajectoryEnsemble& ens) {
  const ProblemConfig& cfg = problem.config;
  if (P.grid_id != ens.grid_id || problem.grid.id() != ens.grid_id) {
    throw DimensionError("fundamental_identity_residual: inputs live on different grids");
  }
  const CostEstimate cost = evaluate_cost(ens, problem.cost, problem.gram);
  const Eigen::VectorXd quadratic = quadratic_term_per_path(ens);

  CostReport r;
  r.J_estimate = cost.J_estimate;
  r.J_stderr = cost.J_stderr;
  r.quadratic_term = quadratic.mean();
  const Eigen::VectorXd y0 = space::to_ortho(problem.x0, problem.gram);
  r.initial_form = y0.dot(P.P_at(cfg.tau) * y0);
  // Without noise there is no trace term for either candidate.
  r.trace_one = cfg.noise.enabled
                    ? riccati::trace_term(P, problem.bi, 1.0, cfg.tau, cfg.horizon)
                    : 0.0;
  r.rhs_half = r.initial_form + r.quadratic_term + 0.5 * r.trace_one;
  r.rhs_one = r.initial_form + r.quadratic_term + r.trace_one;
  const double lhs = r.J_estimate;
  const double scale = std::max(1.0, std::abs(lhs));
  // lhs - quadratic is what fluctuates; the rest of the right side is deterministic.
  const Eigen::VectorXd diff = cost.per_path - quadratic;
  const MeanStderr ms = mean_stderr(diff);
  r.combined_stderr = ms.stderr;
  r.gap_half = ms.mean - r.initial_form - 0.5 * r.trace_one;
  r.gap_one = ms.mean - r.initial_form - r.trace_one;
  r.residual_half = r.gap_half / scale;
  r.residual_one = r.gap_one / scale;
  r.identity_residual = cfg.trace_coeff == 0.5 ? r.residual_half : r.residual_one;
  r.value_analytic = r.initial_form + cfg.trace_coeff * r.trace_one;
  return r;
}

CoefficientVerdict coefficient_verdict(const CostReport& report, double k) {
  const double band = k * report.combined_stderr;
  return {std::abs(report.gap_half) <= band, std::abs(report.gap_one) <= band};
}

std::vector<double> band_limited_perturbation(std::uint64_t seed, std::size_t index,
                                              std::size_t n_steps, int modes,
                                              double amplitude) {
  if (n_steps == 0 || modes < 0) {
    throw ConfigError("band_limited_perturbation: need n_steps > 0 and modes >= 0");
  }
  // Separate stream from the state noise drawn with the same seed.
  const std::uint64_t stream = seed ^ 0x9e3779b97f4a7c15ULL;
  std::vector<double> cos_coeff(static_cast<std::size_t>(modes) + 1);
  std::vector<double> sin_coeff(static_cast<std::size_t>(modes) + 1);
  for (int j = 0; j <= modes; ++j) {
    const auto pair =
        stochastic::normal_pair(stream, index, static_cast<std::uint32_t>(j), 0);
    const double decay = 1.0 / static_cast<double>(std::max(j, 1));
    cos_coeff[static_cast<std::size_t>(j)] = pair[0] * decay;
    sin_coeff[static_cast<std::size_t>(j)] = j == 0 ? 0.0 : pair[1] * decay;
  }
  std::vector<double> out(n_steps);
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double s = (static_cast<double>(k) + 0.5) / static_cast<double>(n_steps);
    double v = 0.0;
    for (int j = 0; j <= modes; ++j) {
      const double arg = 2.0 * std::numbers::pi * j * s;
      v += cos_coeff[static_cast<std::size_t>(j)] * std::cos(arg) +
           sin_coeff[static_cast<std::size_t>(j)] * std::sin(arg);
    }
    out[k] = amplitude * v;
  }
  return out;
}

OptimalityReport optimality_check(const riccati::RiccatiSolution& P, const Problem& problem,
                                  const std::vector<std::vector<double>>& deltas,
                                  unsigned workers) {
  const stochastic::NoiseConfig& noise = problem.config.noise;
  const auto N = static_cast<Eigen::Index>(noise.n_steps);
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (deltas[i].size() != noise.n_steps) {
      throw ConfigError("optimality_check: perturbation " + std::to_string(i) +
                        " needs one value per step");
    }
    for (double v : deltas[i]) {
      if (!std::isfinite(v)) {
        throw ConfigError("optimality_check: perturbation " + std::to_string(i) +
                          " is not finite");
      }
    }
  }
  const stochastic::SimulationOptions options = cost_options(problem, &P, workers);
  const stochastic::TrajectoryEnsemble optimal = stochastic::simulate_closed_loop(
      problem.generator, problem.bi, problem.gram, problem.x0, P, noise, options);
  OptimalityReport report;
  report.optimal = evaluate_cost(optimal, problem.cost, problem.gram);
  const Eigen::VectorXd q_optimal = quadratic_term_per_path(optimal);
  const Eigen::MatrixXd u_optimal = optimal.controls.leftCols(N);

  for (const auto& delta : deltas) {
    const Eigen::Map<const Eigen::RowVectorXd> d(delta.data(), N);
    const Eigen::MatrixXd u = u_optimal.rowwise() + d;
    const stochastic::TrajectoryEnsemble perturbed =
        stochastic::simulate_mild(problem.generator, problem.bi, problem.gram, problem.x0,
                                  stochastic::ControlSignal::adapted(u), noise, options);
    const CostEstimate cost = evaluate_cost(perturbed, problem.cost, problem.gram);
    const Eigen::VectorXd gap = cost.per_path - report.optimal.per_path;
    const Eigen::VectorXd predicted = quadratic_term_per_path(perturbed) - q_optimal;
    const MeanStderr g = mean_stderr(gap);
    const MeanStderr mismatch = mean_stderr(gap - predicted);

    OptimalityRow row;
    row.gap = g.mean;
    row.paired_stderr = g.stderr;
    row.predicted_gap = predicted.mean();
    row.prediction_stderr = mismatch.stderr;
    row.nonnegative = row.gap >= -3.0 * row.paired_stderr;
    // Without sampling error the comparison is relative, against the prediction.
    const double band = mismatch.stderr > 0.0 ? 3.0 * mismatch.stderr
                                              : 1e-3 * std::abs(row.predicted_gap);
    row.matches_prediction = std::abs(mismatch.mean) <= band;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace halfline::lq
