#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's numerical routines.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <Eigen/Dense>

namespace halfline::testing {

// Adaptive Gauss-Kronrod on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-13) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, tol,
                                                                        &error);
}

// Integral over (a, infinity) of a function decaying at infinity.
template <class F>
double integrate_to_infinity(F&& f, double a = 0.0, double tol = 1e-13) {
  boost::math::quadrature::exp_sinh<double> rule;
  return rule.integrate([&](double x) { return f(x + a); }, 0.0,
                        std::numeric_limits<double>::infinity(), tol);
}

// The half-line Dirichlet heat kernel written out from the image construction.
inline double reference_kernel(double t, double xi, double eta) {
  const double pre = 1.0 / std::sqrt(4.0 * M_PI * t);
  return pre * (std::exp(-(xi - eta) * (xi - eta) / (4.0 * t)) -
                std::exp(-(xi + eta) * (xi + eta) / (4.0 * t)));
}

// (e^{tA} e^{-mu .})(xi) by adaptive quadrature of the kernel integral, split
// at the kernel peak.
inline double reference_semigroup_on_exponential(double t, double mu, double xi) {
  auto integrand = [&](double eta) { return reference_kernel(t, xi, eta) * std::exp(-mu * eta); };
  const double spread = 12.0 * std::sqrt(t);
  const double lo = std::max(0.0, xi - spread);
  const double hi = xi + spread;
  double value = integrate(integrand, lo, hi, 1e-14);
  if (lo > 0.0) value += integrate(integrand, 0.0, lo, 1e-14);
  value += integrate_to_infinity(integrand, hi, 1e-14);
  return value;
}

// Exact solution of the scalar backward Riccati problem
//   p' = 2 a p - c + b^2 p^2 on [0, T], p(T) = 0 (a > 0 means decay rate a),
// written in remaining time r = T - t.
inline double scalar_riccati(double a, double b, double c, double r) {
  if (c == 0.0) return 0.0;
  const double delta = std::sqrt(a * a + b * b * c);
  const double decay = std::exp(-2.0 * delta * r);
  return c * (1.0 - decay) / ((delta + a) + (delta - a) * decay);
}

// Classical RK4 on the same scalar problem with many steps.
inline double scalar_riccati_rk4(double a, double b, double c, double r, int steps) {
  auto rhs = [&](double p) { return -2.0 * a * p + c - b * b * p * p; };
  const double h = r / steps;
  double p = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double k1 = rhs(p);
    const double k2 = rhs(p + 0.5 * h * k1);
    const double k3 = rhs(p + 0.5 * h * k2);
    const double k4 = rhs(p + h * k3);
    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return p;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(gen);
  return v;
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace halfline::testing

#include <boost/math/quadrature/gauss.hpp>

namespace halfline::testing {

// Composite 20-point Gauss-Legendre over geometrically graded panels
// [0, s0], [s0, 2 s0], [2 s0, 4 s0], ..., suited to integrands with layers of
// width s0 at the origin. Works for any Eigen-valued integrand.
template <class F>
auto integrate_graded(F&& f, double upper, double s0) {
  using boost::math::quadrature::gauss;
  using Value = decltype(f(0.0));
  Value total = f(0.5 * s0) * 0.0;
  double lo = 0.0;
  double hi = std::min(s0, upper);
  while (lo < upper) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const auto& abscissa = gauss<double, 20>::abscissa();
    const auto& weights = gauss<double, 20>::weights();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        total += weights[i] * half * f(mid);
      } else {
        total += weights[i] * half * (f(mid - half * abscissa[i]) + f(mid + half * abscissa[i]));
      }
    }
    lo = hi;
    hi = std::min(upper, 2.0 * hi);
  }
  return total;
}

}  // namespace halfline::testing
