#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "halfline/cli.hpp"
#include "halfline/errors.hpp"

namespace halfline::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

// Hash recorded by a previous run in `dir`, empty if none.
std::string recorded_hash(const fs::path& dir) {
  const fs::path summary = dir / "summary.json";
  if (!fs::exists(summary)) return {};
  try {
    const json j = json::parse(read_file(summary.string()));
    return j.value("config_hash", std::string());
  } catch (const std::exception&) {
    return {};
  }
}

void check_destination(const fs::path& dir, const std::string& hash, bool force) {
  if (force || !fs::exists(dir)) return;
  if (!fs::is_directory(dir)) {
    throw ConfigError("output path '" + dir.string() + "' exists and is not a directory");
  }
  if (fs::is_empty(dir)) return;
  const std::string previous = recorded_hash(dir);
  if (previous == hash) return;
  throw ConfigError("output directory '" + dir.string() + "' holds results of " +
                    (previous.empty() ? std::string("an unknown configuration")
                                      : "configuration " + previous) +
                    "; use --force to replace them");
}

json summary_document(const RunConfig& cfg, const CommandOutput& output, const std::string& hash) {
  json checks = json::object();
  bool all = true;
  for (const Check& c : output.checks) {
    json entry = c.detail.is_object() ? c.detail : json::object();
    entry["passed"] = c.passed;
    checks[c.name] = entry;
    all = all && c.passed;
  }
  json files = json::array();
  if (cfg.emit_csv) {
    for (const Artifact& a : output.files) files.push_back(a.name);
  }
  json doc = output.summary;
  doc["tool"] = "heatlq";
  doc["subcommand"] = to_string(cfg.subcommand);
  doc["config_hash"] = hash;
  doc["seed"] = cfg.problem.noise.seed;
  doc["config"] = effective_config(cfg);
  doc["checks"] = checks;
  doc["all_checks_passed"] = all;
  doc["files"] = files;
  return doc;
}

}  // namespace

void write_outputs(const RunConfig& cfg, const CommandOutput& output, const std::string& out_dir,
                   bool force) {
  const std::string hash = config_hash(cfg);
  const fs::path dir(out_dir);
  check_destination(dir, hash, force);
  fs::path staging = dir;
  staging += ".staging";
  fs::remove_all(staging);
  try {
    fs::create_directories(staging);
    if (cfg.emit_csv) {
      for (const Artifact& a : output.files) write_file(staging / a.name, a.content);
    }
    if (cfg.emit_summary) {
      write_file(staging / "summary.json", summary_document(cfg, output, hash).dump(2) + "\n");
    }
    fs::remove_all(dir);
    if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
    fs::rename(staging, dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic LQ boundary control of the half-line heat equation", "heatlq"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  bool force = false;
  for (Subcommand s : {Subcommand::semigroup_check, Subcommand::regularity, Subcommand::riccati,
                       Subcommand::simulate, Subcommand::verify_identity, Subcommand::optimal}) {
    CLI::App* sub = app.add_subcommand(to_string(s));
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "Output directory (default: heatlq-<subcommand>)");
    sub->add_option("--seed", seed, "Override noise.seed");
    sub->add_option("--workers", workers, "Simulation worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--force", force, "Replace results of a different configuration");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const Subcommand cmd = subcommand_from_string(app.get_subcommands().front()->get_name());
  const bool seed_given = app.get_subcommands().front()->count("--seed") > 0;
  if (out_dir.empty()) out_dir = std::string("heatlq-") + to_string(cmd);
  try {
    RunConfig cfg = parse_config(read_file(config_path), cmd);
    if (seed_given) cfg.problem.noise.seed = seed;
    const std::string hash = config_hash(cfg);
    check_destination(out_dir, hash, force);
    const CommandOutput output = run_command(cfg, workers);
    write_outputs(cfg, output, out_dir, force);
    bool all = true;
    for (const Check& c : output.checks) {
      out << (c.passed ? "PASS " : "FAIL ") << c.name << ' ' << c.detail.dump() << '\n';
      all = all && c.passed;
    }
    out << "wrote " << out_dir << " (config " << hash << ")\n";
    if (!all && cfg.enforce_checks) return 4;
    return 0;
  } catch (const ConfigError& e) {
    err << "heatlq: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    err << "heatlq: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "heatlq: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "heatlq: numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "heatlq: error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace halfline::cli
