#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <Eigen/Eigenvalues>

#include "halfline/errors.hpp"
#include "halfline/stochastic.hpp"

namespace halfline::stochastic {
namespace {

// Paths advance in blocks of fixed width; every block has the same shape, so
// the floating-point work done for a path is independent of how blocks are
// distributed over threads.
constexpr Eigen::Index kBlock = 64;

struct Plan {
  StepOperators step;
  Eigen::VectorXd y0;
  Eigen::MatrixXd feedback_gains;  // (n_steps + 1) x n, feedback only
  Eigen::MatrixXd readout_gains;   // (n_steps + 1) x n, optional
};

Eigen::MatrixXd sample_gains(const riccati::RiccatiSolution& P, const std::vector<double>& times) {
  Eigen::MatrixXd gains(static_cast<Eigen::Index>(times.size()), 0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Eigen::RowVectorXd g = P.gain(times[k]);
    if (k == 0) gains.resize(static_cast<Eigen::Index>(times.size()), g.size());
    gains.row(static_cast<Eigen::Index>(k)) = g;
  }
  return gains;
}

double control_value(const ControlSignal& u, std::size_t path, std::size_t k,
                     std::size_t n_steps) {
  const std::size_t held = std::min(k, n_steps - 1);
  switch (u.kind()) {
    case ControlSignal::Kind::zero:
      return 0.0;
    case ControlSignal::Kind::constant:
      return u.constant_value();
    case ControlSignal::Kind::sampled:
      return u.values()[held];
    case ControlSignal::Kind::adapted:
      return u.path_values()(static_cast<Eigen::Index>(path), static_cast<Eigen::Index>(held));
    case ControlSignal::Kind::feedback:
      return u.values().empty() ? 0.0 : u.values()[held];
  }
  return 0.0;
}

void run_block(std::size_t block, const Plan& plan, const ControlSignal& u,
               const NoiseConfig& cfg, const SimulationOptions& options,
               const Eigen::VectorXd& x0, const space::Gram& gram, TrajectoryEnsemble& out) {
  const StepOperators& step = plan.step;
  const Eigen::Index n = plan.y0.size();
  const Eigen::Index rank = step.noise_factor.cols();
  const std::size_t first = block * kBlock;
  const std::size_t active = std::min<std::size_t>(kBlock, cfg.n_paths - first);
  const std::size_t n_steps = cfg.n_steps;
  const double dt = step.dt;
  const double root_dt = std::sqrt(dt);

  Eigen::MatrixXd Y = plan.y0.replicate(1, kBlock);
  Eigen::MatrixXd next(n, kBlock);
  Eigen::RowVectorXd drive(kBlock);
  Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(rank, kBlock);
  Eigen::RowVectorXd controls(kBlock);
  Eigen::MatrixXd observed;
  const bool feedback = u.kind() == ControlSignal::Kind::feedback;

  for (std::size_t k = 0; k <= n_steps; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    controls.setZero();
    if (feedback) controls.noalias() = -plan.feedback_gains.row(kk) * Y;
    for (std::size_t j = 0; j < active; ++j) {
      controls[static_cast<Eigen::Index>(j)] += control_value(u, first + j, k, n_steps);
    }
    const Eigen::RowVectorXd norms = Y.colwise().squaredNorm();
    if (options.observation != nullptr) observed.noalias() = *options.observation * Y;
    for (std::size_t j = 0; j < active; ++j) {
      const auto p = static_cast<Eigen::Index>(first + j);
      const auto jj = static_cast<Eigen::Index>(j);
      out.controls(p, kk) = controls[jj];
      out.h_norm_sq(p, kk) = norms[jj];
      out.observed_sq(p, kk) =
          options.observation != nullptr ? observed.col(jj).squaredNorm() : norms[jj];
      if (options.readout != nullptr) out.readout(p, kk) = plan.readout_gains.row(kk).dot(Y.col(jj));
      if (options.store_states) {
        out.states[first + j].col(kk) =
            k == 0 ? x0 : space::from_ortho(Y.col(jj), gram);
      }
    }
    if (k == n_steps) break;

    drive = controls;
    if (cfg.enabled) {
      for (std::size_t j = 0; j < active; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const std::uint64_t path = first + j;
        const auto sk = static_cast<std::uint32_t>(k);
        // Normal 0 drives W itself; normals 1..rank drive the residual noise.
        for (Eigen::Index lane = 0; 2 * lane <= rank; ++lane) {
          const auto pair = normal_pair(cfg.seed, path, sk, static_cast<std::uint32_t>(lane));
          if (lane == 0) {
            drive[jj] += pair[0] * root_dt / dt;
          } else {
            Z(2 * lane - 1, jj) = pair[0];
          }
          if (2 * lane + 1 <= rank) Z(2 * lane, jj) = pair[1];
        }
      }
    }
    next.noalias() = step.transition * Y;
    next.noalias() += step.input * drive;
    if (cfg.enabled && rank > 0) next.noalias() += step.noise_factor * Z;
    Y.swap(next);
    if (!Y.leftCols(static_cast<Eigen::Index>(active)).allFinite()) {
      throw NumericError("simulation blew up at step " + std::to_string(k + 1) + " (t = " +
                         std::to_string(out.times[k + 1]) + ")");
    }
  }
  if (options.terminal != nullptr) {
    const Eigen::MatrixXd GY = *options.terminal * Y.leftCols(static_cast<Eigen::Index>(active));
    for (std::size_t j = 0; j < active; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      out.terminal_form[static_cast<Eigen::Index>(first + j)] = Y.col(jj).dot(GY.col(jj));
    }
  }
}

}  // namespace

StepOperators step_operators(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                             double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("step_operators: dt must be positive");
  if (generator.grid_id() != bi.grid_id) throw DimensionError("step_operators: grid mismatch");
  const auto factor = ops::spectral_factor(generator);
  const Eigen::VectorXd& kappa = factor->kappa;
  const Eigen::Index n = kappa.size();

  StepOperators s;
  s.dt = dt;
  s.transition = factor->function([dt](double k) { return std::exp(-dt * k); });
  const Eigen::VectorXd c = factor->basis_inv * bi.b_ortho;
  // Integral of e^{-s kappa} over (0, dt).
  const Eigen::VectorXd held = kappa.unaryExpr([dt](double k) {
    return k * dt < 1e-8 ? dt * (1.0 - 0.5 * k * dt) : -std::expm1(-dt * k) / k;
  });
  const Eigen::VectorXd input_modal = c.cwiseProduct(held);
  s.input = factor->basis * input_modal;

  Eigen::MatrixXd lyapunov(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double k = kappa[i] + kappa[j];
      const double integral = k * dt < 1e-8 ? dt * (1.0 - 0.5 * k * dt) : -std::expm1(-dt * k) / k;
      lyapunov(i, j) = c[i] * c[j] * integral;
    }
  }
  s.covariance = factor->basis * lyapunov * factor->basis.transpose();
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();

  // Conditional covariance of the step noise given dW, assembled modally to
  // avoid cancelling two large matrices.
  Eigen::MatrixXd conditional = lyapunov - input_modal * input_modal.transpose() / dt;
  conditional = factor->basis * conditional * factor->basis.transpose();
  conditional = 0.5 * (conditional + conditional.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(conditional);
  if (solver.info() != Eigen::Success) {
    throw NumericError("step_operators: covariance factorization failed");
  }
  const Eigen::VectorXd& eig = solver.eigenvalues();
  const double top = eig.size() > 0 ? eig.maxCoeff() : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    if (eig[i] > 1e-13 * top && top > 0.0) ++rank;
  }
  s.noise_factor.resize(n, rank);
  // Eigenvalues are ascending: keep the trailing `rank`, largest first.
  for (Eigen::Index j = 0; j < rank; ++j) {
    const Eigen::Index src = n - 1 - j;
    s.noise_factor.col(j) = solver.eigenvectors().col(src) * std::sqrt(std::max(eig[src], 0.0));
  }
  return s;
}

TrajectoryEnsemble simulate_mild(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                 const space::Gram& gram, const Eigen::VectorXd& x0,
                                 const ControlSignal& u, const NoiseConfig& cfg,
                                 const SimulationOptions& options) {
  cfg.validate();
  u.validate(cfg);
  if (generator.grid_id() != bi.grid_id || gram.grid_id != generator.grid_id()) {
    throw DimensionError("simulate: generator, boundary input and Gram differ in grid");
  }
  const Eigen::Index n = generator.size();
  if (x0.size() != n) throw DimensionError("simulate: initial condition has the wrong length");
  if (!x0.allFinite()) throw ConfigError("simulate: initial condition is not finite");
  if (options.observation != nullptr && options.observation->cols() != n) {
    throw DimensionError("simulate: observation operator has the wrong size");
  }
  if (options.terminal != nullptr &&
      (options.terminal->rows() != n || options.terminal->cols() != n)) {
    throw DimensionError("simulate: terminal weight has the wrong size");
  }

  TrajectoryEnsemble out;
  out.seed_used = cfg.seed;
  out.grid_id = generator.grid_id();
  out.dt = cfg.dt();
  out.times.resize(cfg.n_steps + 1);
  for (std::size_t k = 0; k <= cfg.n_steps; ++k) {
    out.times[k] = cfg.tau + static_cast<double>(k) * out.dt;
  }
  out.times.back() = cfg.horizon;

  Plan plan;
  plan.step = step_operators(generator, bi, out.dt);
  plan.y0 = space::to_ortho(x0, gram);
  if (u.kind() == ControlSignal::Kind::feedback) {
    if (u.solution()->grid_id != generator.grid_id()) {
      throw DimensionError("simulate: feedback gain lives on a different grid");
    }
    plan.feedback_gains = sample_gains(*u.solution(), out.times);
  }
  if (options.readout != nullptr) {
    if (options.readout->grid_id != generator.grid_id()) {
      throw DimensionError("simulate: readout gain lives on a different grid");
    }
    plan.readout_gains = sample_gains(*options.readout, out.times);
  }

  const auto paths = static_cast<Eigen::Index>(cfg.n_paths);
  const auto columns = static_cast<Eigen::Index>(cfg.n_steps + 1);
  out.controls.resize(paths, columns);
  out.h_norm_sq.resize(paths, columns);
  out.observed_sq.resize(paths, columns);
  out.terminal_form = Eigen::VectorXd::Zero(paths);
  if (options.readout != nullptr) out.readout.resize(paths, columns);
  if (options.store_states) out.states.assign(cfg.n_paths, Eigen::MatrixXd(n, columns));

  const std::size_t blocks = (cfg.n_paths + kBlock - 1) / kBlock;
  unsigned workers = options.workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                          : options.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b, plan, u, cfg, options, x0, gram, out);
    return out;
  }
  std::atomic<std::size_t> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = cursor++; b < blocks; b = cursor++) {
        try {
          run_block(b, plan, u, cfg, options, x0, gram, out);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_lock);
          if (!failure) failure = std::current_exception();
          cursor = blocks;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

TrajectoryEnsemble simulate_closed_loop(const ops::LinOp& generator,
                                        const ops::BoundaryInput& bi, const space::Gram& gram,
                                        const Eigen::VectorXd& x0,
                                        const riccati::RiccatiSolution& P,
                                        const NoiseConfig& cfg,
                                        const SimulationOptions& options) {
  // Non-owning handle: P outlives the simulation.
  std::shared_ptr<const riccati::RiccatiSolution> handle(
      std::shared_ptr<const riccati::RiccatiSolution>(), &P);
  return simulate_mild(generator, bi, gram, x0, ControlSignal::feedback(handle), cfg, options);
}

TrajectoryEnsemble stochastic_convolution(const ops::LinOp& generator,
                                          const ops::BoundaryInput& bi,
                                          const space::Gram& gram, const NoiseConfig& cfg,
                                          const SimulationOptions& options) {
  return simulate_mild(generator, bi, gram, Eigen::VectorXd::Zero(generator.size()),
                       ControlSignal::zero(), cfg, options);
}

}  // namespace halfline::stochastic
