#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace halfline::space {

enum class WeightKind {
  pure_power,  // rho(xi) = xi^(1+theta)
  capped,      // rho(xi) = min(1, xi^(1+theta))
  unit,        // rho(xi) = 1, the unweighted L^2(dxi) reference space
};

struct WeightSpec {
  double theta = 0.8;
  WeightKind kind = WeightKind::pure_power;

  // Throws ConfigError unless 0 < theta < 1 (theta is ignored for kind unit).
  void validate() const;
};

const char* to_string(WeightKind kind);
WeightKind weight_kind_from_string(const std::string& name);

double weight_at(const WeightSpec& weight, double xi);

/// Truncated, graded mesh on (0, xi_max) carrying the weight and a composite
/// quadrature rule. Nodes exclude both endpoints, where homogeneous Dirichlet
/// conditions hold.
///
/// Copies share an identity (`id()`), which operators use to refuse mixing
/// vectors from different discretizations.
class Grid {
 public:
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& quad_weights() const { return quad_weights_; }
  const WeightSpec& weight() const { return weight_; }
  double xi_max() const { return xi_max_; }
  double clustering() const { return clustering_; }
  int refinement_level() const { return refinement_level_; }
  std::size_t size() const { return static_cast<std::size_t>(nodes_.size()); }
  std::uint64_t id() const { return id_; }

 private:
  friend Grid build_grid(const WeightSpec&, std::size_t, double, double);
  friend Grid refine(const Grid&);
  friend Grid with_weight(const Grid&, const WeightSpec&);

  Grid(const WeightSpec& weight, std::size_t n, double xi_max, double clustering,
       int refinement_level);

  Eigen::VectorXd nodes_;
  Eigen::VectorXd quad_weights_;
  WeightSpec weight_;
  double xi_max_ = 0.0;
  double clustering_ = 1.0;
  int refinement_level_ = 0;
  std::uint64_t id_ = 0;
};

/// nodes[i] = xi_max * ((i + 1) / (n + 1))^clustering, i = 0..n-1.
/// Requires n >= 8, xi_max >= 5 and clustering >= 1.
Grid build_grid(const WeightSpec& weight, std::size_t n, double xi_max,
                double clustering);

/// Next refinement level: n -> 2n + 1, so every old node is kept.
Grid refine(const Grid& grid);

/// Same nodes, different weight. The result is a distinct grid.
Grid with_weight(const Grid& grid, const WeightSpec& weight);

/// Diagonal Gram matrix of the weighted inner product on nodal vectors.
struct Gram {
  Eigen::VectorXd diag;
  Eigen::VectorXd sqrt_diag;
  Eigen::VectorXd inv_sqrt_diag;
  std::uint64_t grid_id = 0;
};

Gram make_gram(const Grid& grid);

double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Gram& gram);
double norm(const Eigen::VectorXd& f, const Gram& gram);

// Coordinates in which the weighted inner product is the Euclidean one.
Eigen::VectorXd to_ortho(const Eigen::VectorXd& f, const Gram& gram);
Eigen::VectorXd from_ortho(const Eigen::VectorXd& y, const Gram& gram);

/// Samples a function at the grid nodes.
template <class F>
Eigen::VectorXd sample(const Grid& grid, F&& f) {
  Eigen::VectorXd out(grid.nodes().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = f(grid.nodes()[i]);
  return out;
}

}  // namespace halfline::space
