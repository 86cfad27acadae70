#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "halfline/cli.hpp"
#include "halfline/errors.hpp"

namespace halfline::cli {
namespace {

using nlohmann::json;

class Csv {
 public:
  Csv(const std::string& hash, const std::vector<std::string>& header) {
    text_ = "# config_hash=" + hash + "\n";
    append(header);
  }

  Csv& cell(double v) {
    cells_.push_back(format_double(v));
    return *this;
  }
  Csv& cell(std::size_t v) {
    cells_.push_back(std::to_string(v));
    return *this;
  }
  Csv& cell(const std::string& v) {
    cells_.push_back(v);
    return *this;
  }
  void end_row() {
    append(cells_);
    cells_.clear();
  }
  const std::string& text() const { return text_; }

 private:
  void append(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::string text_;
  std::vector<std::string> cells_;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr = 0.0;
};

MeanStderr mean_stderr(const Eigen::VectorXd& v) {
  MeanStderr out{v.mean(), 0.0};
  if (v.size() > 1) {
    const double var = (v.array() - out.mean).square().sum() / static_cast<double>(v.size() - 1);
    out.stderr = std::sqrt(var / static_cast<double>(v.size()));
  }
  return out;
}

void add_check(CommandOutput& out, std::string name, bool passed, json detail) {
  out.checks.push_back({std::move(name), passed, std::move(detail)});
}

std::vector<double> geometric_times(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1));
  }
  return out;
}

double level_spread(const std::vector<double>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi / *lo - 1.0;
}

space::Grid base_grid(const lq::ProblemConfig& p) {
  return space::build_grid(p.weight, p.n, p.xi_max, p.clustering);
}

Eigen::VectorXd sin4_bump(const space::Grid& grid, double lo, double hi) {
  return space::sample(grid, [&](double xi) {
    if (xi <= lo || xi >= hi) return 0.0;
    return std::pow(std::sin(std::numbers::pi * (xi - lo) / (hi - lo)), 4);
  });
}

CommandOutput semigroup_check(const RunConfig& cfg, const std::string& hash) {
  const auto& s = cfg.semigroup;
  CommandOutput out;
  space::Grid grid = base_grid(cfg.problem);
  const space::Gram gram = space::make_gram(grid);
  const ops::LinOp a = ops::dirichlet_laplacian(grid);
  const ops::SpectralFactor& factor = a.spectral();

  Csv csv(hash, {"t", "kernel_vs_matrix_relerr", "weighted_norm_ratio", "t_times_AeAt_norm"});
  double worst = 0.0;
  for (double t : s.times) {
    double relerr = 0.0;
    for (const auto& [lo, hi] : s.bumps) {
      const Eigen::VectorXd f = sin4_bump(grid, lo, hi);
      const Eigen::VectorXd by_kernel = ops::apply_semigroup_kernel(t, f, grid);
      const Eigen::VectorXd by_matrix = space::from_ortho(
          factor.apply_function([t](double k) { return std::exp(-t * k); },
                                space::to_ortho(f, gram)),
          gram);
      relerr = std::max(relerr, space::norm(by_kernel - by_matrix, gram) /
                                    space::norm(by_kernel, gram));
    }
    worst = std::max(worst, relerr);
    const double norm =
        ops::spectral_function_norm(factor, [t](double k) { return std::exp(-t * k); });
    const double analytic =
        t * ops::spectral_function_norm(factor, [t](double k) { return k * std::exp(-t * k); });
    csv.cell(t).cell(relerr).cell(norm).cell(analytic).end_row();
  }
  out.files.push_back({"semigroup.csv", csv.text()});
  add_check(out, "kernel_vs_matrix", worst <= 1e-2, {{"max_relerr", worst}, {"tolerance", 1e-2}});

  Csv levels(hash, {"level", "n", "sup_norm", "sup_t_AeAt_norm"});
  std::vector<double> sup_norms, sup_analytic;
  const auto sweep = geometric_times(s.sweep_t_min, 1.0, s.sweep_points);
  for (int level = 0; level < s.levels; ++level) {
    if (level > 0) grid = space::refine(grid);
    const ops::LinOp al = ops::dirichlet_laplacian(grid);
    double sup_norm = 0.0;
    double sup_an = 0.0;
    for (double t : sweep) {
      sup_norm = std::max(sup_norm, ops::spectral_function_norm(
                                        al.spectral(), [t](double k) { return std::exp(-t * k); }));
      sup_an = std::max(sup_an, t * ops::spectral_function_norm(al.spectral(), [t](double k) {
                                  return k * std::exp(-t * k);
                                }));
    }
    sup_norms.push_back(sup_norm);
    sup_analytic.push_back(sup_an);
    levels.cell(static_cast<std::size_t>(level)).cell(grid.size()).cell(sup_norm).cell(sup_an).end_row();
  }
  out.files.push_back({"semigroup_levels.csv", levels.text()});
  if (s.levels > 1) {
    const double spread = level_spread(sup_norms);
    const double spread_an = level_spread(sup_analytic);
    add_check(out, "bounded_across_levels", spread <= 0.2, {{"spread", spread}, {"tolerance", 0.2}});
    add_check(out, "analytic_bound_across_levels", spread_an <= 0.2,
              {{"spread", spread_an}, {"tolerance", 0.2}});
  }
  out.summary["max_kernel_vs_matrix_relerr"] = worst;
  return out;
}

CommandOutput regularity(const RunConfig& cfg, const std::string& hash) {
  const lq::ProblemConfig& p = cfg.problem;
  std::vector<double> alphas = cfg.regularity.alphas;
  if (alphas.empty()) alphas = {0.5 + p.weight.theta / 8.0, 0.4, 0.0};
  const std::size_t n_alpha = alphas.size();
  const int n_levels = cfg.regularity.levels;
  // [alpha][level]
  std::vector<std::vector<double>> weighted(n_alpha), unweighted(n_alpha);
  std::vector<double> psi_weighted, psi_unweighted;

  Csv csv(hash, {"level", "alpha", "weighted_norm", "unweighted_norm", "interp_integral"});
  space::Grid grid = base_grid(p);
  for (int level = 0; level < n_levels; ++level) {
    if (level > 0) grid = space::refine(grid);
    const space::Grid flat = space::with_weight(grid, {p.weight.theta, space::WeightKind::unit});
    const space::Gram gram_w = space::make_gram(grid);
    const space::Gram gram_u = space::make_gram(flat);
    const ops::LinOp a_w = ops::dirichlet_laplacian(grid);
    const ops::LinOp a_u = ops::dirichlet_laplacian(flat);
    const Eigen::VectorXd psi = ops::dirichlet_map(p.lambda0, 1.0, grid);
    const Eigen::VectorXd y_w = space::to_ortho(psi, gram_w);
    const Eigen::VectorXd y_u = space::to_ortho(psi, gram_u);
    psi_weighted.push_back(y_w.norm());
    psi_unweighted.push_back(y_u.norm());
    for (std::size_t i = 0; i < n_alpha; ++i) {
      const double alpha = alphas[i];
      const double lambda0 = p.lambda0;
      auto power = [alpha, lambda0](double k) { return std::pow(lambda0 + k, alpha); };
      const double wn = a_w.spectral().apply_function(power, y_w).norm();
      const double un = a_u.spectral().apply_function(power, y_u).norm();
      // psi lies in the interpolation space of order 1 - alpha exactly when this stays finite.
      const double interp =
          alpha > 0.0 ? ops::regularity_integral(p.weight, p.lambda0, 1.0 - alpha, 1.0, grid)
                      : std::numeric_limits<double>::quiet_NaN();
      weighted[i].push_back(wn);
      unweighted[i].push_back(un);
      csv.cell(static_cast<std::size_t>(level)).cell(alpha).cell(wn).cell(un).cell(interp).end_row();
    }
  }
  CommandOutput out;
  out.files.push_back({"regularity.csv", csv.text()});
  for (std::size_t i = 0; i < n_alpha; ++i) {
    const double alpha = alphas[i];
    char tag_buf[32];
    std::snprintf(tag_buf, sizeof tag_buf, "%g", alpha);
    const std::string tag = tag_buf;
    std::vector<double> steps_w, steps_u;
    for (int l = 1; l < n_levels; ++l) {
      steps_w.push_back(weighted[i][l] / weighted[i][l - 1] - 1.0);
      steps_u.push_back(unweighted[i][l] / unweighted[i][l - 1] - 1.0);
    }
    if (alpha == 0.0) {
      double mismatch = 0.0;
      for (int l = 0; l < n_levels; ++l) {
        mismatch = std::max(mismatch, std::abs(weighted[i][l] / psi_weighted[l] - 1.0));
        mismatch = std::max(mismatch, std::abs(unweighted[i][l] / psi_unweighted[l] - 1.0));
      }
      double drift = 0.0;
      for (int l = 1; l < n_levels; ++l) {
        drift = std::max(drift, std::abs(steps_w[l - 1]));
        drift = std::max(drift, std::abs(steps_u[l - 1]));
      }
      add_check(out, "identity_power_alpha_0", mismatch <= 1e-12 && drift <= 0.01,
                {{"max_mismatch", mismatch}, {"max_drift", drift}});
    } else if (ops::alpha_admissible(alpha, p.weight)) {
      double worst = 0.0;
      for (double v : steps_w) worst = std::max(worst, std::abs(v));
      add_check(out, "weighted_stable_alpha_" + tag, worst <= 0.1,
                {{"max_change_per_doubling", worst}, {"tolerance", 0.1}});
    } else if (alpha < 0.5 && alpha > 0.25) {
      double least = std::numeric_limits<double>::infinity();
      for (double v : steps_u) least = std::min(least, v);
      add_check(out, "unweighted_grows_alpha_" + tag, least >= 0.25,
                {{"min_growth_per_doubling", least}, {"threshold", 0.25}});
    }
  }
  return out;
}

riccati::RiccatiSolution solve(const lq::Problem& p, int steps) {
  return riccati::solve_riccati_ode(p.generator, p.bi, p.cost, p.config.tau, p.config.horizon,
                                    steps);
}

CommandOutput riccati_cmd(const RunConfig& cfg, const std::string& hash) {
  const lq::Problem p = lq::build_problem(cfg.problem);
  const int m = cfg.problem.riccati_steps;
  const auto ode = solve(p, m);
  const auto mild = riccati::solve_riccati_mild(p.generator, p.bi, p.cost, cfg.problem.tau,
                                                cfg.problem.horizon, m, cfg.riccati.max_iter,
                                                cfg.riccati.tol);
  const auto diff = riccati::pointwise_relative_difference(ode, mild);
  const double sup_diff = riccati::max_relative_difference(ode, mild);

  const auto n = static_cast<Eigen::Index>(cfg.problem.n);
  std::vector<Eigen::Index> samples;
  for (Eigen::Index j = 0; j < 4; ++j) samples.push_back(j * n / 4);
  std::vector<std::string> header{"t"};
  for (Eigen::Index i : samples) header.push_back("P_diag_" + std::to_string(i));
  for (const char* h : {"gain_norm", "trace_integrand", "solver_diff"}) header.push_back(h);
  Csv csv(hash, header);
  for (std::size_t k = 0; k < ode.times.size(); ++k) {
    csv.cell(ode.times[k]);
    for (Eigen::Index i : samples) csv.cell(ode.P_mats[k](i, i));
    csv.cell(ode.gain_cache[k].norm()).cell(ode.trace_integrand[k]).cell(diff[k]).end_row();
  }
  CommandOutput out;
  out.files.push_back({"riccati.csv", csv.text()});

  const auto flow = riccati::flow_diagnostics(ode, p.cost);
  const auto fine = solve(p, 2 * m);
  const double trace = riccati::trace_term(ode, p.bi, 1.0, cfg.problem.tau, cfg.problem.horizon);
  const double trace_fine =
      riccati::trace_term(fine, p.bi, 1.0, cfg.problem.tau, cfg.problem.horizon);
  const double trace_change = trace_fine == 0.0 ? std::abs(trace) : std::abs(trace / trace_fine - 1.0);

  add_check(out, "solvers_agree", sup_diff <= 1e-4, {{"sup_relative_difference", sup_diff}, {"tolerance", 1e-4}});
  add_check(out, "symmetric", flow.max_asymmetry <= 1e-10, {{"max_asymmetry", flow.max_asymmetry}});
  add_check(out, "positive_semidefinite", flow.min_eigenvalue >= -1e-10,
            {{"min_eigenvalue", flow.min_eigenvalue}});
  add_check(out, "terminal_condition", flow.terminal_mismatch == 0.0,
            {{"terminal_mismatch", flow.terminal_mismatch}});
  add_check(out, "trace_stable_under_refinement", trace_change <= 0.01,
            {{"relative_change", trace_change}, {"tolerance", 0.01}});

  out.summary["mild_iterations"] = mild.iterations;
  out.summary["mild_final_residual"] = mild.final_residual;
  out.summary["trace_term_half"] = 0.5 * trace;
  out.summary["trace_term_one"] = trace;
  out.summary["value_function"] = lq::value_function(ode, p.bi, p.x0, cfg.problem, p.gram);
  out.summary["sup_norm"] = ode.alpha_norm_report.sup_norm;
  out.summary["sup_singular_factor"] = ode.alpha_norm_report.sup_singular;
  out.summary["endpoint_singular_factor"] = ode.alpha_norm_report.endpoint_singular;
  return out;
}

std::vector<double> sinusoid(std::size_t steps) {
  std::vector<double> out(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    out[k] = std::sin(2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) /
                      static_cast<double>(steps));
  }
  return out;
}

stochastic::ControlSignal open_loop(const std::string& name, double constant, std::size_t steps) {
  if (name == "zero") return stochastic::ControlSignal::zero();
  if (name == "constant") return stochastic::ControlSignal::constant(constant);
  return stochastic::ControlSignal::sampled(sinusoid(steps));
}

// Analytic cost of the optimal control: the trace term only enters with noise.
double optimal_value(const riccati::RiccatiSolution& P, const lq::Problem& p) {
  const lq::ProblemConfig& c = p.config;
  const Eigen::VectorXd y0 = space::to_ortho(p.x0, p.gram);
  const double initial = y0.dot(P.P_at(c.tau) * y0);
  if (!c.noise.enabled) return initial;
  return initial + riccati::trace_term(P, p.bi, c.trace_coeff, c.tau, c.horizon);
}

json compare_with_value(double estimate, double stderr, double value, bool noisy, bool& passed) {
  if (noisy) {
    passed = std::abs(estimate - value) <= 3.0 * stderr;
    return {{"estimate", estimate}, {"stderr", stderr}, {"value_function", value}};
  }
  const double rel = std::abs(estimate - value) / std::max(std::abs(value), 1e-300);
  passed = rel <= 1e-3;
  return {{"estimate", estimate}, {"value_function", value}, {"relative_error", rel}};
}

CommandOutput simulate_cmd(const RunConfig& cfg, const std::string& hash, unsigned workers) {
  const lq::Problem p = lq::build_problem(cfg.problem);
  const auto& noise = cfg.problem.noise;
  const bool feedback = cfg.simulate.control == "feedback";
  const bool noisy = noise.enabled && noise.n_paths > 1;
  CommandOutput out;
  stochastic::TrajectoryEnsemble ens;
  riccati::RiccatiSolution P;
  if (feedback) {
    P = solve(p, cfg.problem.riccati_steps);
    ens = stochastic::simulate_closed_loop(p.generator, p.bi, p.gram, p.x0, P, noise,
                                           lq::cost_options(p, nullptr, workers));
  } else {
    ens = stochastic::simulate_mild(
        p.generator, p.bi, p.gram, p.x0,
        open_loop(cfg.simulate.control, cfg.simulate.constant, noise.n_steps), noise,
        lq::cost_options(p, nullptr, workers));
  }

  Csv csv(hash, {"path", "t", "H_norm", "control"});
  const std::size_t exported = std::min(cfg.simulate.export_paths, ens.n_paths());
  for (std::size_t path = 0; path < exported; ++path) {
    const auto row = static_cast<Eigen::Index>(path);
    for (std::size_t k = 0; k < ens.times.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      csv.cell(path).cell(ens.times[k]).cell(std::sqrt(ens.h_norm_sq(row, col)))
          .cell(ens.controls(row, col)).end_row();
    }
  }
  out.files.push_back({"trajectories.csv", csv.text()});

  const lq::CostEstimate cost = lq::evaluate_cost(ens, p.cost, p.gram);
  const MeanStderr terminal = mean_stderr(ens.h_norm_sq.col(ens.h_norm_sq.cols() - 1));
  out.summary["cost_estimate"] = cost.J_estimate;
  out.summary["cost_stderr"] = cost.J_stderr;
  out.summary["terminal_mean_square"] = terminal.mean;
  out.summary["terminal_mean_square_stderr"] = terminal.stderr;

  if (feedback) {
    bool passed = false;
    const double value = optimal_value(P, p);
    json detail = compare_with_value(cost.J_estimate, cost.J_stderr, value, noisy, passed);
    add_check(out, "closed_loop_cost_matches_value_function", passed, detail);
  }
  if (!feedback && cfg.simulate.control == "zero" && p.x0.isZero(0.0) && noisy) {
    const double expected =
        ops::gamma_integral(p.bi, p.generator, 0.0, cfg.problem.horizon - cfg.problem.tau);
    const bool passed = std::abs(terminal.mean - expected) <= 3.0 * terminal.stderr;
    add_check(out, "convolution_second_moment", passed,
              {{"estimate", terminal.mean}, {"stderr", terminal.stderr}, {"quadrature", expected}});
  }
  return out;
}

CommandOutput verify_identity(const RunConfig& cfg, const std::string& hash, unsigned workers) {
  const lq::Problem base = lq::build_problem(cfg.problem);
  const auto P = solve(base, cfg.problem.riccati_steps);
  const auto& noise = cfg.problem.noise;
  const std::size_t steps = noise.n_steps;

  Csv csv(hash, {"u_name", "seed", "noise", "lhs", "rhs_half", "rhs_one", "residual_half",
                 "residual_one", "stderr"});
  auto emit = [&](const std::string& name, std::uint64_t seed, bool noisy,
                  const lq::CostReport& r) {
    csv.cell(name).cell(std::to_string(seed)).cell(std::string(noisy ? "on" : "off"))
        .cell(r.J_estimate).cell(r.rhs_half).cell(r.rhs_one).cell(r.residual_half)
        .cell(r.residual_one).cell(r.combined_stderr).end_row();
  };

  CommandOutput out;
  bool any_noisy = false;
  bool all_one = true;
  bool all_half = true;
  bool exclusive = true;
  json noisy_rows = json::array();
  if (noise.enabled) {
    for (int r = 0; r < cfg.identity.replicates; ++r) {
      lq::Problem p = base;
      p.config.noise.seed = noise.seed + static_cast<std::uint64_t>(r);
      for (const auto& name : cfg.identity.controls) {
        const auto ens = stochastic::simulate_mild(
            p.generator, p.bi, p.gram, p.x0, open_loop(name, cfg.identity.constant, steps),
            p.config.noise, lq::cost_options(p, &P, workers));
        const lq::CostReport report = lq::fundamental_identity_residual(P, p, ens);
        const lq::CoefficientVerdict v = lq::coefficient_verdict(report);
        emit(name, p.config.noise.seed, true, report);
        any_noisy = true;
        all_one = all_one && v.one_consistent;
        all_half = all_half && v.half_consistent;
        exclusive = exclusive && (v.one_consistent != v.half_consistent);
        noisy_rows.push_back({{"u_name", name},
                              {"seed", p.config.noise.seed},
                              {"gap_half", report.gap_half},
                              {"gap_one", report.gap_one},
                              {"stderr", report.combined_stderr}});
      }
    }
  }

  lq::Problem quiet = base;
  quiet.config.noise.enabled = false;
  quiet.config.noise.n_paths = 1;
  double worst_deterministic = 0.0;
  for (const auto& name : cfg.identity.controls) {
    const auto ens = stochastic::simulate_mild(
        quiet.generator, quiet.bi, quiet.gram, quiet.x0,
        open_loop(name, cfg.identity.constant, steps), quiet.config.noise,
        lq::cost_options(quiet, &P, workers));
    const lq::CostReport report = lq::fundamental_identity_residual(P, quiet, ens);
    emit(name, noise.seed, false, report);
    worst_deterministic = std::max(worst_deterministic, std::abs(report.residual_one));
  }
  out.files.push_back({"identity.csv", csv.text()});

  add_check(out, "deterministic_identity", worst_deterministic <= 1e-3,
            {{"max_abs_residual", worst_deterministic}, {"tolerance", 1e-3}});
  if (any_noisy) {
    json selected = "undetermined";
    if (exclusive && all_one) selected = 1.0;
    if (exclusive && all_half) selected = 0.5;
    out.summary["selected_trace_coeff"] = selected;
    add_check(out, "single_trace_coefficient", exclusive && (all_one || all_half),
              {{"rows", noisy_rows}, {"band_in_stderr", 3.0}});
  } else {
    out.summary["selected_trace_coeff"] = nullptr;
  }
  out.summary["configured_trace_coeff"] = cfg.problem.trace_coeff;
  return out;
}

CommandOutput optimal_cmd(const RunConfig& cfg, const std::string& hash, unsigned workers) {
  const lq::Problem base = lq::build_problem(cfg.problem);
  const auto P = solve(base, cfg.problem.riccati_steps);
  const auto& noise = cfg.problem.noise;
  const auto& o = cfg.optimal;
  CommandOutput out;

  std::vector<std::vector<double>> deltas;
  for (std::size_t i = 0; i < o.perturbations; ++i) {
    deltas.push_back(lq::band_limited_perturbation(noise.seed, i, noise.n_steps, o.modes, o.amplitude));
  }
  lq::Problem paired = base;
  if (noise.enabled) paired.config.noise.n_paths = o.paths;
  const lq::OptimalityReport report = lq::optimality_check(P, paired, deltas, workers);

  Csv csv(hash, {"perturbation_id", "gap", "paired_stderr", "predicted_gap", "prediction_stderr"});
  bool nonnegative = true;
  bool matches = true;
  json failures = json::array();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    csv.cell(i).cell(r.gap).cell(r.paired_stderr).cell(r.predicted_gap).cell(r.prediction_stderr)
        .end_row();
    nonnegative = nonnegative && r.nonnegative;
    matches = matches && r.matches_prediction;
    if (!r.nonnegative || !r.matches_prediction) failures.push_back(i);
  }
  out.files.push_back({"optimal.csv", csv.text()});
  add_check(out, "nonnegative_gaps", nonnegative, {{"failed_perturbations", failures}});
  add_check(out, "gaps_match_prediction", matches, {{"failed_perturbations", failures}});

  const auto closed = stochastic::simulate_closed_loop(base.generator, base.bi, base.gram, base.x0,
                                                       P, noise, lq::cost_options(base, nullptr, workers));
  const lq::CostEstimate cost = lq::evaluate_cost(closed, base.cost, base.gram);
  bool value_ok = false;
  json value_detail = compare_with_value(cost.J_estimate, cost.J_stderr, optimal_value(P, base),
                                         noise.enabled && noise.n_paths > 1, value_ok);
  add_check(out, "closed_loop_cost_matches_value_function", value_ok, value_detail);

  lq::Problem quiet = base;
  quiet.config.noise.enabled = false;
  quiet.config.noise.n_paths = 1;
  const lq::OptimalityReport det = lq::optimality_check(
      P, quiet, {std::vector<double>(noise.n_steps, o.deterministic_constant)}, workers);
  const auto& row = det.rows.front();
  const double rel = std::abs(row.gap - row.predicted_gap) / std::max(std::abs(row.predicted_gap), 1e-300);
  add_check(out, "deterministic_prediction", row.gap > 0.0 && rel <= 1e-3,
            {{"gap", row.gap}, {"predicted_gap", row.predicted_gap}, {"relative_error", rel}});
  out.summary["optimal_cost_estimate"] = cost.J_estimate;
  out.summary["optimal_cost_stderr"] = cost.J_stderr;
  return out;
}

}  // namespace

CommandOutput run_command(const RunConfig& cfg, unsigned workers) {
  const std::string hash = config_hash(cfg);
  switch (cfg.subcommand) {
    case Subcommand::semigroup_check:
      return semigroup_check(cfg, hash);
    case Subcommand::regularity:
      return regularity(cfg, hash);
    case Subcommand::riccati:
      return riccati_cmd(cfg, hash);
    case Subcommand::simulate:
      return simulate_cmd(cfg, hash, workers);
    case Subcommand::verify_identity:
      return verify_identity(cfg, hash, workers);
    case Subcommand::optimal:
      return optimal_cmd(cfg, hash, workers);
  }
  throw ConfigError("unknown subcommand");
}

}  // namespace halfline::cli
