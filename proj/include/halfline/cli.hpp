#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "halfline/lq_control.hpp"

namespace halfline::cli {

enum class Subcommand { semigroup_check, regularity, riccati, simulate, verify_identity, optimal };

const char* to_string(Subcommand cmd);
Subcommand subcommand_from_string(const std::string& name);

struct SemigroupSettings {
  std::vector<double> times{0.01, 0.1, 1.0};
  // Test functions sin^4 bumps on these intervals; must lie in (0, xi_max / 2).
  std::vector<std::pair<double, double>> bumps{{1.0, 3.0}, {2.0, 6.0}, {4.0, 9.0}};
  int levels = 3;
  double sweep_t_min = 1e-3;
  int sweep_points = 31;
};

struct RegularitySettings {
  std::vector<double> alphas;  // empty means {1/2 + theta/8, 0.4, 0}
  int levels = 3;
};

struct RiccatiSettings {
  int max_iter = 50;
  double tol = 1e-10;
};

struct SimulateSettings {
  std::string control = "feedback";  // zero, constant, sinusoid, feedback
  double constant = 0.5;
  std::size_t export_paths = 20;
};

struct IdentitySettings {
  std::vector<std::string> controls{"zero", "constant", "sinusoid"};
  double constant = 0.5;
  int replicates = 3;
};

struct OptimalSettings {
  std::size_t perturbations = 20;
  std::size_t paths = 1000;
  int modes = 4;
  double amplitude = 0.3;
  double deterministic_constant = 0.5;
};

struct RunConfig {
  Subcommand subcommand = Subcommand::riccati;
  lq::ProblemConfig problem;
  SemigroupSettings semigroup;
  RegularitySettings regularity;
  RiccatiSettings riccati;
  SimulateSettings simulate;
  IdentitySettings identity;
  OptimalSettings optimal;
  bool emit_csv = true;
  bool emit_summary = true;
  // When false, failed checks are reported but do not change the exit status.
  bool enforce_checks = true;
};

/// Parses a JSON configuration. Missing keys take defaults; unknown keys and
/// out-of-range values throw ConfigError naming the field.
RunConfig parse_config(const std::string& json_text, Subcommand subcommand);

/// Every field with its effective value; keys sorted.
nlohmann::json effective_config(const RunConfig& cfg);

/// FNV-1a 64 of the compact effective configuration, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// 17 significant digits, shortest exponent form where needed.
std::string format_double(double v);

struct Check {
  std::string name;
  bool passed = false;
  nlohmann::json detail;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct CommandOutput {
  std::vector<Artifact> files;
  std::vector<Check> checks;
  nlohmann::json summary = nlohmann::json::object();
};

/// Runs a subcommand in memory; nothing touches the file system.
CommandOutput run_command(const RunConfig& cfg, unsigned workers);

/// Writes artifacts into `out_dir` through a staging directory. Refuses to
/// replace a directory produced by a different configuration unless `force`.
void write_outputs(const RunConfig& cfg, const CommandOutput& output, const std::string& out_dir,
                   bool force);

/// Entry point of the heatlq tool. Returns the process exit status:
/// 0 success, 2 configuration error, 3 numeric failure, 4 failed checks.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace halfline::cli
