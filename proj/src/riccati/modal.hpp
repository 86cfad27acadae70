#pragma once

// Shared machinery of the two Riccati solvers. Both work with the congruent
// matrix Ph = S^T P S, S the eigenbasis of A, in which the Lyapunov part of
// the flow acts elementwise: d/dr Ph = -K o Ph + Ch - (Ph c)(Ph c)^T with
// K_ij = kappa_i + kappa_j and r = T - t the remaining time.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "halfline/riccati.hpp"

namespace halfline::riccati::detail {

// phi_k(z) = sum_j z^j / (j + k)!
double phi(int k, double z);

struct ModalProblem {
  std::shared_ptr<const ops::SpectralFactor> factor;
  Eigen::MatrixXd K;
  Eigen::MatrixXd C_hat;
  Eigen::MatrixXd G_hat;
  Eigen::VectorXd w;  // (lambda0 - A)^{1-alpha} E in orthonormalized coordinates
  Eigen::VectorXd c;  // S^{-1} w
  double tau = 0.0;
  double horizon = 0.0;
  double h = 0.0;
  int m = 0;
  // Weights of the exponential integrators at z = -h K.
  Eigen::MatrixXd decay;        // e^z
  Eigen::MatrixXd h_phi1;       // h phi_1(z)
  Eigen::MatrixXd h2_phi2;      // h^2 phi_2(z)
  Eigen::MatrixXd h2_phi2_3;    // h^2 (phi_2 - phi_3)(z)
  Eigen::MatrixXd h2_phi3;      // h^2 phi_3(z)
  double scale = 0.0;           // |G_hat| + T |C_hat|, for blow-up detection
};

ModalProblem make_modal_problem(const ops::LinOp& generator, const ops::BoundaryInput& bi,
                                const CostSpec& cost, double tau, double T, int m);

Eigen::MatrixXd elementwise(const Eigen::MatrixXd& z, int k, double scale);

/// Collects Ph at r = 0, h, 2h, ... and produces the RiccatiSolution.
class SolutionBuilder {
 public:
  SolutionBuilder(const ModalProblem& problem, const ops::BoundaryInput& bi,
                  const CostSpec& cost, std::uint64_t grid_id);

  void push(const Eigen::MatrixXd& P_hat);
  RiccatiSolution finish();

 private:
  const ModalProblem& problem_;
  RiccatiSolution out_;
  Eigen::MatrixXd G_;
  Eigen::MatrixXd previous_hat_;
  Eigen::VectorXd previous_g_;
};

}  // namespace halfline::riccati::detail
