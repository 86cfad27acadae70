#include "halfline/weighted_space.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "halfline/errors.hpp"

namespace halfline::space {
namespace {

std::uint64_t next_grid_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

void require_finite(double value, const char* field) {
  if (!std::isfinite(value)) {
    throw ConfigError(std::string(field) + " must be finite");
  }
}

void check_same_size(const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (f.size() != g.size()) {
    throw DimensionError("vector sizes differ: " + std::to_string(f.size()) +
                         " vs " + std::to_string(g.size()));
  }
}

}  // namespace

void WeightSpec::validate() const {
  if (kind == WeightKind::unit) return;
  if (!std::isfinite(theta) || theta <= 0.0 || theta >= 1.0) {
    throw ConfigError("theta must lie in (0, 1), got " + std::to_string(theta));
  }
}

const char* to_string(WeightKind kind) {
  switch (kind) {
    case WeightKind::pure_power:
      return "pure_power";
    case WeightKind::capped:
      return "capped";
    case WeightKind::unit:
      return "unit";
  }
  return "unknown";
}

WeightKind weight_kind_from_string(const std::string& name) {
  if (name == "pure_power") return WeightKind::pure_power;
  if (name == "capped") return WeightKind::capped;
  if (name == "unit") return WeightKind::unit;
  throw ConfigError("weight.kind must be one of pure_power, capped, unit; got '" +
                    name + "'");
}

double weight_at(const WeightSpec& weight, double xi) {
  if (!std::isfinite(xi) || xi < 0.0) {
    throw DomainError("weight_at: xi must be finite and nonnegative");
  }
  switch (weight.kind) {
    case WeightKind::pure_power:
      return std::pow(xi, 1.0 + weight.theta);
    case WeightKind::capped:
      return xi >= 1.0 ? 1.0 : std::pow(xi, 1.0 + weight.theta);
    case WeightKind::unit:
      return 1.0;
  }
  return 0.0;
}

Grid::Grid(const WeightSpec& weight, std::size_t n, double xi_max, double clustering,
           int refinement_level)
    : nodes_(static_cast<Eigen::Index>(n)),
      quad_weights_(static_cast<Eigen::Index>(n)),
      weight_(weight),
      xi_max_(xi_max),
      clustering_(clustering),
      refinement_level_(refinement_level),
      id_(next_grid_id()) {
  const double denom = static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    nodes_[static_cast<Eigen::Index>(i)] =
        xi_max * std::pow(static_cast<double>(i + 1) / denom, clustering);
  }
  // Dual cells: node i owns [m_{i-1}, m_i] with midpoints between neighbours
  // and the virtual endpoints 0 and xi_max closing the first and last cells.
  const auto last = static_cast<Eigen::Index>(n) - 1;
  double left = 0.0;
  for (Eigen::Index i = 0; i <= last; ++i) {
    const double right = i == last ? xi_max : 0.5 * (nodes_[i] + nodes_[i + 1]);
    quad_weights_[i] = right - left;
    left = right;
  }
  for (Eigen::Index i = 0; i <= last; ++i) {
    if (!(quad_weights_[i] > 0.0) || (i > 0 && !(nodes_[i] > nodes_[i - 1]))) {
      throw ConfigError("grid: degenerate node spacing (n too large for xi_max?)");
    }
  }
}

Grid build_grid(const WeightSpec& weight, std::size_t n, double xi_max,
                double clustering) {
  weight.validate();
  require_finite(xi_max, "xi_max");
  require_finite(clustering, "clustering");
  if (n < 8) throw ConfigError("n must be at least 8, got " + std::to_string(n));
  if (xi_max < 5.0) {
    throw ConfigError("xi_max must be at least 5, got " + std::to_string(xi_max));
  }
  if (clustering < 1.0) {
    throw ConfigError("clustering must be at least 1, got " + std::to_string(clustering));
  }
  return Grid(weight, n, xi_max, clustering, 0);
}

Grid refine(const Grid& grid) {
  return Grid(grid.weight(), 2 * grid.size() + 1, grid.xi_max(), grid.clustering(),
              grid.refinement_level() + 1);
}

Grid with_weight(const Grid& grid, const WeightSpec& weight) {
  weight.validate();
  Grid out = grid;
  out.weight_ = weight;
  out.id_ = next_grid_id();
  return out;
}

Gram make_gram(const Grid& grid) {
  Gram gram;
  const auto n = static_cast<Eigen::Index>(grid.size());
  gram.diag.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram.diag[i] = weight_at(grid.weight(), grid.nodes()[i]) * grid.quad_weights()[i];
  }
  gram.sqrt_diag = gram.diag.array().sqrt();
  gram.inv_sqrt_diag = gram.sqrt_diag.array().inverse();
  gram.grid_id = grid.id();
  return gram;
}

double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Gram& gram) {
  check_same_size(f, g);
  check_same_size(f, gram.diag);
  return (f.array() * g.array() * gram.diag.array()).sum();
}

double norm(const Eigen::VectorXd& f, const Gram& gram) {
  return std::sqrt(std::max(0.0, inner(f, f, gram)));
}

Eigen::VectorXd to_ortho(const Eigen::VectorXd& f, const Gram& gram) {
  check_same_size(f, gram.sqrt_diag);
  return f.cwiseProduct(gram.sqrt_diag);
}

Eigen::VectorXd from_ortho(const Eigen::VectorXd& y, const Gram& gram) {
  check_same_size(y, gram.inv_sqrt_diag);
  return y.cwiseProduct(gram.inv_sqrt_diag);
}

}  // namespace halfline::space
