#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "halfline/operators.hpp"
#include "halfline/riccati.hpp"
#include "halfline/weighted_space.hpp"

namespace halfline::stochastic {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Standard normal pair number `lane` of (seed, path, step), by Box-Muller on
/// one Philox block.
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t path, std::uint32_t step,
                                  std::uint32_t lane);

struct NoiseConfig {
  std::uint64_t seed = 0;
  std::size_t n_paths = 1;
  std::size_t n_steps = 100;
  double tau = 0.0;
  double horizon = 1.0;
  // With noise disabled every path is the deterministic solution.
  bool enabled = true;

  void validate() const;
  double dt() const { return (horizon - tau) / static_cast<double>(n_steps); }
};

/// dW over each step of path `path_index`; variance dt.
std::vector<double> brownian_increments(const NoiseConfig& cfg, std::size_t path_index);

/// Scalar boundary control, held constant over each step.
class ControlSignal {
 public:
  enum class Kind { zero, constant, sampled, adapted, feedback };

  static ControlSignal zero();
  static ControlSignal constant(double value);
  // One value per step.
  static ControlSignal sampled(std::vector<double> values);
  // One value per path and step (n_paths x n_steps), e.g. a recorded control process.
  static ControlSignal adapted(Eigen::MatrixXd values);
  // u_k = -gain(t_k) x_k + offset_k; offset empty or one value per step.
  static ControlSignal feedback(std::shared_ptr<const riccati::RiccatiSolution> solution,
                                std::vector<double> offset = {});

  Kind kind() const { return kind_; }
  double constant_value() const { return constant_; }
  const std::vector<double>& values() const { return values_; }
  const Eigen::MatrixXd& path_values() const { return path_values_; }
  const riccati::RiccatiSolution* solution() const { return solution_.get(); }

  // Throws ConfigError when lengths or time coverage do not match cfg.
  void validate(const NoiseConfig& cfg) const;

 private:
  Kind kind_ = Kind::zero;
  double constant_ = 0.0;
  std::vector<double> values_;
  Eigen::MatrixXd path_values_;
  std::shared_ptr<const riccati::RiccatiSolution> solution_;
};

/// Exact one-step data of the exponential integrator in orthonormalized
/// coordinates: x_{k+1} = F x_k + phi_b (u_k + dW_k / dt) + R z_k.
struct StepOperators {
  Eigen::MatrixXd transition;     // F = e^{dt A}
  Eigen::VectorXd input;          // phi_b = integral of e^{sA} b over (0, dt)
  Eigen::MatrixXd covariance;     // Q = integral of e^{sA} b b^T e^{sA^T} over (0, dt)
  Eigen::MatrixXd noise_factor;   // R R^T = Q - phi_b phi_b^T / dt, n x rank
  double dt = 0.0;
};

StepOperators step_operators(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                             double dt);

struct SimulationOptions {
  bool store_states = false;
  // Observation operator C (orthonormalized coordinates); null means C = I.
  const Eigen::MatrixXd* observation = nullptr;
  // Terminal weight G; null means G = 0.
  const Eigen::MatrixXd* terminal = nullptr;
  // Records gain(t_k) x_k along every path.
  const riccati::RiccatiSolution* readout = nullptr;
  // 0 means all hardware threads.
  unsigned workers = 1;
};

struct TrajectoryEnsemble {
  std::vector<double> times;               // n_steps + 1
  std::vector<Eigen::MatrixXd> states;     // per path, n x (n_steps + 1) nodal; optional
  Eigen::MatrixXd controls;                // n_paths x (n_steps + 1)
  Eigen::MatrixXd h_norm_sq;               // |x(t_k)|_H^2
  Eigen::MatrixXd observed_sq;             // |C x(t_k)|^2
  Eigen::VectorXd terminal_form;           // <G x(T), x(T)>
  Eigen::MatrixXd readout;                 // gain(t_k) x(t_k); optional
  std::uint64_t seed_used = 0;
  std::uint64_t grid_id = 0;
  double dt = 0.0;

  std::size_t n_paths() const { return static_cast<std::size_t>(controls.rows()); }
  std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
};

TrajectoryEnsemble simulate_mild(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                 const space::Gram& gram, const Eigen::VectorXd& x0,
                                 const ControlSignal& u, const NoiseConfig& cfg,
                                 const SimulationOptions& options = {});

TrajectoryEnsemble simulate_closed_loop(const ops::LinOp& generator,
                                        const ops::BoundaryInput& bi, const space::Gram& gram,
                                        const Eigen::VectorXd& x0,
                                        const riccati::RiccatiSolution& P,
                                        const NoiseConfig& cfg,
                                        const SimulationOptions& options = {});

/// W_A on [tau, T]: the mild solution from zero without control.
TrajectoryEnsemble stochastic_convolution(const ops::LinOp& generator,
                                          const ops::BoundaryInput& bi,
                                          const space::Gram& gram, const NoiseConfig& cfg,
                                          const SimulationOptions& options = {});

}  // namespace halfline::stochastic
