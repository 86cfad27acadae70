#include <cmath>
#include <string>

#include "halfline/errors.hpp"
#include "halfline/stochastic.hpp"

namespace halfline::stochastic {

ControlSignal ControlSignal::zero() { return ControlSignal(); }

ControlSignal ControlSignal::constant(double value) {
  if (!std::isfinite(value)) throw ConfigError("constant control must be finite");
  ControlSignal u;
  u.kind_ = Kind::constant;
  u.constant_ = value;
  return u;
}

ControlSignal ControlSignal::sampled(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("sampled control contains non-finite values");
  }
  ControlSignal u;
  u.kind_ = Kind::sampled;
  u.values_ = std::move(values);
  return u;
}

ControlSignal ControlSignal::adapted(Eigen::MatrixXd values) {
  if (!values.allFinite()) throw ConfigError("adapted control contains non-finite values");
  ControlSignal u;
  u.kind_ = Kind::adapted;
  u.path_values_ = std::move(values);
  return u;
}

ControlSignal ControlSignal::feedback(std::shared_ptr<const riccati::RiccatiSolution> solution,
                                      std::vector<double> offset) {
  if (!solution) throw ConfigError("feedback control needs a Riccati solution");
  ControlSignal u;
  u.kind_ = Kind::feedback;
  u.solution_ = std::move(solution);
  u.values_ = std::move(offset);
  return u;
}

void ControlSignal::validate(const NoiseConfig& cfg) const {
  switch (kind_) {
    case Kind::zero:
    case Kind::constant:
      return;
    case Kind::sampled:
      if (values_.size() != cfg.n_steps) {
        throw ConfigError("sampled control has " + std::to_string(values_.size()) +
                          " values, expected n_steps = " + std::to_string(cfg.n_steps));
      }
      return;
    case Kind::adapted:
      if (static_cast<std::size_t>(path_values_.rows()) != cfg.n_paths ||
          static_cast<std::size_t>(path_values_.cols()) != cfg.n_steps) {
        throw ConfigError("adapted control must be n_paths x n_steps");
      }
      return;
    case Kind::feedback: {
      if (!values_.empty() && values_.size() != cfg.n_steps) {
        throw ConfigError("feedback offset must have n_steps values");
      }
      const double slack = 1e-12 * std::max(1.0, std::abs(cfg.horizon));
      if (solution_->tau > cfg.tau + slack || solution_->horizon < cfg.horizon - slack) {
        throw ConfigError("feedback Riccati solution does not cover [tau, T]");
      }
      return;
    }
  }
}

}  // namespace halfline::stochastic
