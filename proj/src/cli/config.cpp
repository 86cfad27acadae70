#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "halfline/cli.hpp"
#include "halfline/errors.hpp"

namespace halfline::cli {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (const auto& item : obj.items()) {
    if (allowed.count(item.key()) == 0) {
      throw ConfigError("unknown key '" + join(path, item.key()) + "'");
    }
  }
}

const json* object_at(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) return nullptr;
  const json& v = obj.at(key);
  if (!v.is_object()) throw ConfigError(join(path, key) + " must be an object");
  return &v;
}

void read(const json& obj, const std::string& key, const std::string& path, double& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key) + " must be a number");
  out = v.get<double>();
  if (!std::isfinite(out)) throw ConfigError(join(path, key) + " must be finite");
}

template <class Int>
void read_int(const json& obj, const std::string& key, const std::string& path, Int& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key) + " must be an integer");
  if constexpr (std::is_unsigned_v<Int>) {
    if (!v.is_number_unsigned()) throw ConfigError(join(path, key) + " must be nonnegative");
    out = static_cast<Int>(v.get<std::uint64_t>());
  } else {
    out = static_cast<Int>(v.get<std::int64_t>());
  }
}

void read(const json& obj, const std::string& key, const std::string& path, bool& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key) + " must be true or false");
  out = v.get<bool>();
}

void read(const json& obj, const std::string& key, const std::string& path, std::string& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key) + " must be a string");
  out = v.get<std::string>();
}

void read(const json& obj, const std::string& key, const std::string& path,
          std::vector<double>& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_array()) throw ConfigError(join(path, key) + " must be an array of numbers");
  out.clear();
  for (const json& e : v) {
    if (!e.is_number()) throw ConfigError(join(path, key) + " must be an array of numbers");
    out.push_back(e.get<double>());
    if (!std::isfinite(out.back())) throw ConfigError(join(path, key) + " must be finite");
  }
}

lq::Profile read_profile(const json& obj, const std::string& path, lq::Profile profile) {
  reject_unknown(obj, path, {"kind", "scale", "center", "width", "mu"});
  std::string kind = lq::to_string(profile.kind);
  read(obj, "kind", path, kind);
  profile.kind = lq::profile_kind_from_string(kind, join(path, "kind"));
  read(obj, "scale", path, profile.scale);
  read(obj, "center", path, profile.center);
  read(obj, "width", path, profile.width);
  read(obj, "mu", path, profile.mu);
  profile.validate(path);
  return profile;
}

json profile_json(const lq::Profile& p) {
  return {{"kind", lq::to_string(p.kind)},
          {"scale", p.scale},
          {"center", p.center},
          {"width", p.width},
          {"mu", p.mu}};
}

const char* operator_kind(lq::OperatorChoice::Kind kind) {
  switch (kind) {
    case lq::OperatorChoice::Kind::identity:
      return "identity";
    case lq::OperatorChoice::Kind::zero:
      return "zero";
    case lq::OperatorChoice::Kind::multiplication:
      return "multiplication";
  }
  return "unknown";
}

lq::OperatorChoice read_operator(const json& obj, const std::string& path,
                                 lq::OperatorChoice choice) {
  reject_unknown(obj, path, {"kind", "profile"});
  std::string kind = operator_kind(choice.kind);
  read(obj, "kind", path, kind);
  if (kind == "identity") {
    choice.kind = lq::OperatorChoice::Kind::identity;
  } else if (kind == "zero") {
    choice.kind = lq::OperatorChoice::Kind::zero;
  } else if (kind == "multiplication") {
    choice.kind = lq::OperatorChoice::Kind::multiplication;
  } else {
    throw ConfigError(join(path, "kind") + " must be one of identity, zero, multiplication; got '" +
                      kind + "'");
  }
  if (const json* p = object_at(obj, "profile", path)) {
    choice.profile = read_profile(*p, join(path, "profile"), choice.profile);
  }
  if (choice.kind == lq::OperatorChoice::Kind::multiplication &&
      choice.profile.kind == lq::Profile::Kind::zero && !obj.contains("profile")) {
    throw ConfigError(join(path, "profile") + " is required for a multiplication operator");
  }
  return choice;
}

json operator_json(const lq::OperatorChoice& c) {
  json out{{"kind", operator_kind(c.kind)}};
  if (c.kind == lq::OperatorChoice::Kind::multiplication) out["profile"] = profile_json(c.profile);
  return out;
}

void read_problem(const json& root, lq::ProblemConfig& p) {
  if (const json* w = object_at(root, "weight", "")) {
    reject_unknown(*w, "weight", {"kind", "theta"});
    std::string kind = space::to_string(p.weight.kind);
    read(*w, "kind", "weight", kind);
    p.weight.kind = space::weight_kind_from_string(kind);
    read(*w, "theta", "weight", p.weight.theta);
  }
  if (const json* g = object_at(root, "grid", "")) {
    reject_unknown(*g, "grid", {"n", "xi_max", "clustering"});
    read_int(*g, "n", "grid", p.n);
    read(*g, "xi_max", "grid", p.xi_max);
    read(*g, "clustering", "grid", p.clustering);
  }
  read(root, "lambda0", "", p.lambda0);
  read(root, "alpha", "", p.alpha);
  read(root, "tau", "", p.tau);
  read(root, "T", "", p.horizon);
  read(root, "trace_coeff", "", p.trace_coeff);
  if (const json* c = object_at(root, "cost", "")) {
    reject_unknown(*c, "cost", {"C", "G"});
    if (const json* op = object_at(*c, "C", "cost")) {
      p.observation = read_operator(*op, "cost.C", p.observation);
    }
    if (const json* op = object_at(*c, "G", "cost")) {
      p.terminal = read_operator(*op, "cost.G", p.terminal);
    }
  }
  if (const json* n = object_at(root, "noise", "")) {
    reject_unknown(*n, "noise", {"seed", "n_paths", "n_steps", "enabled"});
    read_int(*n, "seed", "noise", p.noise.seed);
    read_int(*n, "n_paths", "noise", p.noise.n_paths);
    read_int(*n, "n_steps", "noise", p.noise.n_steps);
    read(*n, "enabled", "noise", p.noise.enabled);
  }
  p.noise.tau = p.tau;
  p.noise.horizon = p.horizon;
  if (const json* x = object_at(root, "x0", "")) {
    if (x->contains("values")) {
      reject_unknown(*x, "x0", {"kind", "values"});
      std::string kind = "values";
      read(*x, "kind", "x0", kind);
      if (kind != "values") throw ConfigError("x0.kind must be 'values' when x0.values is given");
      read(*x, "values", "x0", p.x0_nodal);
    } else {
      p.x0 = read_profile(*x, "x0", p.x0);
    }
  }
}

json problem_json(const lq::ProblemConfig& p) {
  json x0 = p.x0_nodal.empty() ? profile_json(p.x0)
                               : json{{"kind", "values"}, {"values", p.x0_nodal}};
  return {
      {"weight", {{"kind", space::to_string(p.weight.kind)}, {"theta", p.weight.theta}}},
      {"grid", {{"n", p.n}, {"xi_max", p.xi_max}, {"clustering", p.clustering}}},
      {"lambda0", p.lambda0},
      {"alpha", p.alpha},
      {"tau", p.tau},
      {"T", p.horizon},
      {"trace_coeff", p.trace_coeff},
      {"cost", {{"C", operator_json(p.observation)}, {"G", operator_json(p.terminal)}}},
      {"noise",
       {{"seed", p.noise.seed},
        {"n_paths", p.noise.n_paths},
        {"n_steps", p.noise.n_steps},
        {"enabled", p.noise.enabled}}},
      {"x0", x0},
  };
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void read_settings(const json& root, RunConfig& cfg) {
  if (const json* s = object_at(root, "semigroup", "")) {
    reject_unknown(*s, "semigroup", {"times", "bumps", "levels", "sweep_t_min", "sweep_points"});
    read(*s, "times", "semigroup", cfg.semigroup.times);
    if (s->contains("bumps")) {
      const json& b = s->at("bumps");
      require(b.is_array(), "semigroup.bumps must be an array of [lo, hi] pairs");
      cfg.semigroup.bumps.clear();
      for (const json& e : b) {
        require(e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number(),
                "semigroup.bumps must be an array of [lo, hi] pairs");
        cfg.semigroup.bumps.emplace_back(e[0].get<double>(), e[1].get<double>());
      }
    }
    read_int(*s, "levels", "semigroup", cfg.semigroup.levels);
    read(*s, "sweep_t_min", "semigroup", cfg.semigroup.sweep_t_min);
    read_int(*s, "sweep_points", "semigroup", cfg.semigroup.sweep_points);
  }
  if (const json* s = object_at(root, "regularity", "")) {
    reject_unknown(*s, "regularity", {"alphas", "levels"});
    read(*s, "alphas", "regularity", cfg.regularity.alphas);
    read_int(*s, "levels", "regularity", cfg.regularity.levels);
  }
  if (const json* s = object_at(root, "riccati", "")) {
    reject_unknown(*s, "riccati", {"steps", "max_iter", "tol"});
    read_int(*s, "steps", "riccati", cfg.problem.riccati_steps);
    read_int(*s, "max_iter", "riccati", cfg.riccati.max_iter);
    read(*s, "tol", "riccati", cfg.riccati.tol);
  }
  if (const json* s = object_at(root, "simulate", "")) {
    reject_unknown(*s, "simulate", {"control", "constant", "export_paths"});
    read(*s, "control", "simulate", cfg.simulate.control);
    read(*s, "constant", "simulate", cfg.simulate.constant);
    read_int(*s, "export_paths", "simulate", cfg.simulate.export_paths);
  }
  if (const json* s = object_at(root, "identity", "")) {
    reject_unknown(*s, "identity", {"controls", "constant", "replicates"});
    if (s->contains("controls")) {
      const json& c = s->at("controls");
      require(c.is_array(), "identity.controls must be an array of names");
      cfg.identity.controls.clear();
      for (const json& e : c) {
        require(e.is_string(), "identity.controls must be an array of names");
        cfg.identity.controls.push_back(e.get<std::string>());
      }
    }
    read(*s, "constant", "identity", cfg.identity.constant);
    read_int(*s, "replicates", "identity", cfg.identity.replicates);
  }
  if (const json* s = object_at(root, "optimal", "")) {
    reject_unknown(*s, "optimal",
                   {"perturbations", "paths", "modes", "amplitude", "deterministic_constant"});
    read_int(*s, "perturbations", "optimal", cfg.optimal.perturbations);
    read_int(*s, "paths", "optimal", cfg.optimal.paths);
    read_int(*s, "modes", "optimal", cfg.optimal.modes);
    read(*s, "amplitude", "optimal", cfg.optimal.amplitude);
    read(*s, "deterministic_constant", "optimal", cfg.optimal.deterministic_constant);
  }
}

bool known_control(const std::string& name) {
  return name == "zero" || name == "constant" || name == "sinusoid";
}

void validate_settings(const RunConfig& cfg) {
  const lq::ProblemConfig& p = cfg.problem;
  const auto& sg = cfg.semigroup;
  require(!sg.times.empty(), "semigroup.times must not be empty");
  for (double t : sg.times) require(t > 0.0 && t <= 1.0, "semigroup.times must lie in (0, 1]");
  require(!sg.bumps.empty(), "semigroup.bumps must not be empty");
  for (const auto& [lo, hi] : sg.bumps) {
    require(lo > 0.0 && lo < hi && hi <= p.xi_max / 2.0,
            "semigroup.bumps must satisfy 0 < lo < hi <= grid.xi_max / 2");
  }
  require(sg.levels >= 1 && sg.levels <= 4, "semigroup.levels must lie in [1, 4]");
  require(sg.sweep_t_min > 0.0 && sg.sweep_t_min < 1.0, "semigroup.sweep_t_min must lie in (0, 1)");
  require(sg.sweep_points >= 2, "semigroup.sweep_points must be at least 2");
  for (double a : cfg.regularity.alphas) {
    require(a >= 0.0 && a < 1.0, "regularity.alphas must lie in [0, 1)");
  }
  require(cfg.regularity.levels >= 2 && cfg.regularity.levels <= 4,
          "regularity.levels must lie in [2, 4]");
  require(cfg.riccati.max_iter >= 1, "riccati.max_iter must be positive");
  require(cfg.riccati.tol > 0.0, "riccati.tol must be positive");
  require(known_control(cfg.simulate.control) || cfg.simulate.control == "feedback",
          "simulate.control must be one of zero, constant, sinusoid, feedback");
  require(!cfg.identity.controls.empty(), "identity.controls must not be empty");
  for (const auto& c : cfg.identity.controls) {
    require(known_control(c), "identity.controls entries must be zero, constant or sinusoid");
  }
  require(cfg.identity.replicates >= 1 && cfg.identity.replicates <= 16,
          "identity.replicates must lie in [1, 16]");
  require(cfg.optimal.paths >= 2, "optimal.paths must be at least 2");
  require(cfg.optimal.modes >= 0 && cfg.optimal.modes <= 64, "optimal.modes must lie in [0, 64]");
}

}  // namespace

const char* to_string(Subcommand cmd) {
  switch (cmd) {
    case Subcommand::semigroup_check:
      return "semigroup-check";
    case Subcommand::regularity:
      return "regularity";
    case Subcommand::riccati:
      return "riccati";
    case Subcommand::simulate:
      return "simulate";
    case Subcommand::verify_identity:
      return "verify-identity";
    case Subcommand::optimal:
      return "optimal";
  }
  return "unknown";
}

Subcommand subcommand_from_string(const std::string& name) {
  for (Subcommand s : {Subcommand::semigroup_check, Subcommand::regularity, Subcommand::riccati,
                       Subcommand::simulate, Subcommand::verify_identity, Subcommand::optimal}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError("unknown subcommand '" + name + "'");
}

RunConfig parse_config(const std::string& json_text, Subcommand subcommand) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(root, "",
                 {"weight", "grid", "lambda0", "alpha", "tau", "T", "trace_coeff", "cost",
                  "noise", "x0", "semigroup", "regularity", "riccati", "simulate", "identity",
                  "optimal", "emit", "enforce_checks"});
  RunConfig cfg;
  cfg.subcommand = subcommand;
  read_problem(root, cfg.problem);
  read_settings(root, cfg);
  if (root.contains("emit")) {
    const json& e = root.at("emit");
    require(e.is_array(), "emit must be an array containing csv and/or summary");
    cfg.emit_csv = false;
    cfg.emit_summary = false;
    for (const json& item : e) {
      require(item.is_string(), "emit must be an array containing csv and/or summary");
      const std::string s = item.get<std::string>();
      if (s == "csv") {
        cfg.emit_csv = true;
      } else if (s == "summary") {
        cfg.emit_summary = true;
      } else {
        throw ConfigError("emit entries must be csv or summary; got '" + s + "'");
      }
    }
  }
  read(root, "enforce_checks", "", cfg.enforce_checks);
  cfg.problem.validate();
  validate_settings(cfg);
  return cfg;
}

nlohmann::json effective_config(const RunConfig& cfg) {
  json out = problem_json(cfg.problem);
  out["subcommand"] = to_string(cfg.subcommand);
  json bumps = json::array();
  for (const auto& [lo, hi] : cfg.semigroup.bumps) bumps.push_back({lo, hi});
  out["semigroup"] = {{"times", cfg.semigroup.times},
                      {"bumps", bumps},
                      {"levels", cfg.semigroup.levels},
                      {"sweep_t_min", cfg.semigroup.sweep_t_min},
                      {"sweep_points", cfg.semigroup.sweep_points}};
  out["regularity"] = {{"alphas", cfg.regularity.alphas}, {"levels", cfg.regularity.levels}};
  out["riccati"] = {{"steps", cfg.problem.riccati_steps},
                    {"max_iter", cfg.riccati.max_iter},
                    {"tol", cfg.riccati.tol}};
  out["simulate"] = {{"control", cfg.simulate.control},
                     {"constant", cfg.simulate.constant},
                     {"export_paths", cfg.simulate.export_paths}};
  out["identity"] = {{"controls", cfg.identity.controls},
                     {"constant", cfg.identity.constant},
                     {"replicates", cfg.identity.replicates}};
  out["optimal"] = {{"perturbations", cfg.optimal.perturbations},
                    {"paths", cfg.optimal.paths},
                    {"modes", cfg.optimal.modes},
                    {"amplitude", cfg.optimal.amplitude},
                    {"deterministic_constant", cfg.optimal.deterministic_constant}};
  json emit = json::array();
  if (cfg.emit_csv) emit.push_back("csv");
  if (cfg.emit_summary) emit.push_back("summary");
  out["emit"] = emit;
  out["enforce_checks"] = cfg.enforce_checks;
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string text = effective_config(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace halfline::cli
