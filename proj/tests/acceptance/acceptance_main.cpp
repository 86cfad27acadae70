// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "halfline/cli.hpp"
#include "halfline/riccati.hpp"
#include "support/oracles.hpp"

namespace {

using halfline::cli::Check;
using halfline::cli::CommandOutput;
using halfline::cli::RunConfig;
using halfline::cli::Subcommand;
using nlohmann::json;
namespace fs = std::filesystem;

unsigned g_workers = 1;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0 means no runtime limit
  std::function<Outcome()> body;
};

RunConfig config(Subcommand cmd, const std::string& text) {
  return halfline::cli::parse_config(text, cmd);
}

CommandOutput execute(Subcommand cmd, const std::string& text) {
  return halfline::cli::run_command(config(cmd, text), g_workers);
}

const Check& find_check(const CommandOutput& out, const std::string& name) {
  for (const Check& c : out.checks) {
    if (c.name == name) return c;
  }
  throw std::runtime_error("check '" + name + "' was not produced");
}

// Requires every named check to pass; collects their details.
Outcome require(const CommandOutput& out, const std::vector<std::string>& names,
                const std::string& prefix = "") {
  Outcome o{true, ""};
  for (const std::string& name : names) {
    const Check& c = find_check(out, name);
    o.passed = o.passed && c.passed;
    if (!o.detail.empty()) o.detail += ' ';
    o.detail += prefix + name + (c.passed ? "=ok" : "=FAILED") + c.detail.dump();
  }
  return o;
}

Outcome merge(const std::vector<Outcome>& parts) {
  Outcome o{true, ""};
  for (const Outcome& p : parts) {
    o.passed = o.passed && p.passed;
    if (!o.detail.empty()) o.detail += ' ';
    o.detail += p.detail;
  }
  return o;
}

Outcome semigroup_cross_realization() {
  const CommandOutput out = execute(Subcommand::semigroup_check, R"({
    "grid": {"n": 400, "xi_max": 20},
    "semigroup": {"times": [0.01, 0.1, 1], "levels": 1}
  })");
  return require(out, {"kernel_vs_matrix"});
}

Outcome semigroup_bounds() {
  const CommandOutput out = execute(Subcommand::semigroup_check, R"({
    "grid": {"n": 200},
    "semigroup": {"levels": 3, "sweep_t_min": 0.001}
  })");
  return require(out, {"bounded_across_levels", "analytic_bound_across_levels"});
}

Outcome regularity_dichotomy() {
  std::vector<Outcome> parts;
  for (const char* kind : {"pure_power", "capped"}) {
    const std::string text = std::string(R"({"weight": {"kind": ")") + kind +
                             R"(", "theta": 0.8}, "regularity": {"alphas": [0.6, 0.4], "levels": 3}})";
    const CommandOutput out = execute(Subcommand::regularity, text);
    parts.push_back(require(out, {"weighted_stable_alpha_0.6", "unweighted_grows_alpha_0.4"},
                            std::string(kind) + ":"));
  }
  return merge(parts);
}

Outcome convolution_moment() {
  const CommandOutput out = execute(Subcommand::simulate, R"({
    "x0": {"kind": "zero"},
    "noise": {"n_paths": 5000, "seed": 11},
    "simulate": {"control": "zero"}
  })");
  return require(out, {"convolution_second_moment"});
}

// Scalar problem p' = 2 a p - c + b^2 p^2 backward from p(T) = 0.
Outcome scalar_surrogate() {
  namespace r = halfline::riccati;
  const double a = 0.7, b = 1.3, c = 2.0, T = 2.0;
  const std::uint64_t id = 0x5ca1a7;
  const halfline::ops::LinOp op(Eigen::MatrixXd::Constant(1, 1, -a), id);
  halfline::ops::BoundaryInput bi;
  bi.lambda0 = 1.0;
  bi.alpha = 0.6;
  bi.grid_id = id;
  bi.e_ortho = Eigen::VectorXd::Constant(1, b / std::pow(1.0 + a, 0.4));
  bi.b_ortho = Eigen::VectorXd::Constant(1, b);
  const r::CostSpec cost{halfline::ops::LinOp(Eigen::MatrixXd::Constant(1, 1, std::sqrt(c)), id),
                         halfline::ops::LinOp(Eigen::MatrixXd::Zero(1, 1), id)};
  const r::RiccatiSolution ode = r::solve_riccati_ode(op, bi, cost, 0.0, T, 400);
  const r::RiccatiSolution mild = r::solve_riccati_mild(op, bi, cost, 0.0, T, 2000, 200, 1e-13);
  const double size = halfline::testing::scalar_riccati(a, b, c, T);
  double worst = 0.0;
  for (const r::RiccatiSolution* sol : {&ode, &mild}) {
    for (std::size_t k = 0; k < sol->times.size(); ++k) {
      const double exact = halfline::testing::scalar_riccati(a, b, c, T - sol->times[k]);
      worst = std::max(worst, std::abs(sol->P_mats[k](0, 0) - exact) / size);
    }
  }
  const json detail = {{"max_relative_error", worst}, {"tolerance", 1e-6}};
  return {worst <= 1e-6, "scalar_surrogate" + std::string(worst <= 1e-6 ? "=ok" : "=FAILED") +
                             detail.dump()};
}

CommandOutput& reference_riccati() {
  static CommandOutput out = execute(Subcommand::riccati, R"({"grid": {"n": 200}, "riccati": {"steps": 400}})");
  return out;
}

Outcome riccati_cross_validation() {
  return merge({require(reference_riccati(), {"solvers_agree"}), scalar_surrogate()});
}

Outcome riccati_flow() {
  return require(reference_riccati(), {"symmetric", "positive_semidefinite", "terminal_condition",
                                       "trace_stable_under_refinement"});
}

Outcome fundamental_identity() {
  const CommandOutput out = execute(Subcommand::verify_identity, R"({
    "noise": {"n_paths": 10000, "seed": 0},
    "identity": {"controls": ["zero", "constant", "sinusoid"], "replicates": 3}
  })");
  Outcome o = require(out, {"deterministic_identity", "single_trace_coefficient"});
  o.detail = "selected_trace_coeff=" + out.summary.value("selected_trace_coeff", json()).dump() +
             " " + o.detail;
  return o;
}

Outcome optimality() {
  const CommandOutput out = execute(Subcommand::optimal, R"({
    "noise": {"n_paths": 10000},
    "optimal": {"perturbations": 20}
  })");
  return require(out, {"nonnegative_gaps", "gaps_match_prediction",
                       "closed_loop_cost_matches_value_function", "deterministic_prediction"});
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    files[entry.path().filename().string()] = buf.str();
  }
  return files;
}

int invoke(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"heatlq"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return halfline::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "heatlq_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg_path = root / "config.json";
  std::ofstream(cfg_path) << R"({
    "grid": {"n": 60},
    "riccati": {"steps": 120},
    "noise": {"n_paths": 600, "n_steps": 60, "seed": 99},
    "semigroup": {"levels": 2, "sweep_points": 9},
    "regularity": {"levels": 2},
    "identity": {"replicates": 2},
    "optimal": {"perturbations": 3, "paths": 200},
    "enforce_checks": false
  })";
  std::size_t compared = 0;
  std::vector<std::string> mismatches;
  for (const char* cmd : {"semigroup-check", "regularity", "riccati", "simulate", "verify-identity",
                          "optimal"}) {
    std::map<std::string, std::string> first;
    int run_index = 0;
    for (const char* workers : {"1", "1", "2", "5"}) {
      const fs::path out = root / (std::string(cmd) + "_" + std::to_string(run_index++));
      if (invoke({cmd, "--config", cfg_path.string(), "--out", out.string(), "--workers", workers}) != 0) {
        mismatches.push_back(std::string(cmd) + ":exit");
        continue;
      }
      const auto files = read_tree(out);
      if (first.empty()) {
        first = files;
        continue;
      }
      if (files != first) mismatches.push_back(std::string(cmd) + ":workers=" + workers);
      compared += files.size();
    }
  }
  fs::remove_all(root);
  const bool passed = mismatches.empty() && compared > 0;
  json detail = {{"artifacts_compared", compared}, {"mismatches", mismatches}};
  return {passed, "byte_identical" + std::string(passed ? "=ok" : "=FAILED") + detail.dump()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_workers = static_cast<unsigned>(std::max(1, std::atoi(argv[1])));
  const std::vector<Criterion> criteria{
      {1, "semigroup_cross_realization", 10, semigroup_cross_realization},
      {2, "semigroup_bounds_across_levels", 60, semigroup_bounds},
      {3, "fractional_regularity_dichotomy", 60, regularity_dichotomy},
      {4, "stochastic_convolution_moment", 120, convolution_moment},
      {5, "riccati_cross_validation", 120, riccati_cross_validation},
      {6, "riccati_flow_properties", 0, riccati_flow},
      {7, "fundamental_identity", 600, fundamental_identity},
      {8, "optimality", 600, optimality},
      {9, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0 || seconds <= c.budget_s;
    const bool passed = o.passed && in_time;
    failures += passed ? 0 : 1;
    char timing[64];
    if (c.budget_s > 0) {
      std::snprintf(timing, sizeof timing, "%.1fs/%gs", seconds, c.budget_s);
    } else {
      std::snprintf(timing, sizeof timing, "%.1fs", seconds);
    }
    std::cout << (passed ? "PASS" : "FAIL") << ' ' << c.id << ' ' << c.name << " [" << timing
              << (in_time ? "" : " over budget") << "] " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
