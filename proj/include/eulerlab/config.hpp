#pragma once

#include <yaml-cpp/yaml.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "eulerlab/construction.hpp"
#include "eulerlab/solver.hpp"

namespace eulerlab {

enum class Experiment { construct, psweep, fit_log, evolve, flowmap, commutator };

inline constexpr std::array<std::pair<Experiment, const char*>, 6> experiment_names{{
    {Experiment::construct, "construct"},
    {Experiment::psweep, "psweep"},
    {Experiment::fit_log, "fit-log"},
    {Experiment::evolve, "evolve"},
    {Experiment::flowmap, "flowmap"},
    {Experiment::commutator, "commutator"},
}};

inline std::string to_string(Experiment e) {
  for (auto [k, name] : experiment_names)
    if (k == e) return name;
  return "?";
}

inline Experiment parse_experiment(const std::string& s) {
  for (auto [k, name] : experiment_names)
    if (s == name) return k;
  throw std::invalid_argument("unknown experiment '" + s + "'");
}

struct SweepConfig {
  std::vector<double> p{2, 4, 8, 16, 32, 64};
  std::vector<double> eps{0.1, 0.03, 0.01};
  std::vector<double> a{0.01, 0.02, 0.04};
  bool operator==(const SweepConfig&) const = default;
};

struct FitConfig {
  double r_min = 0.0;  // 0: four grid cells
  double r_max = 0.25;
  int harmonics = 0;
  double p_min = 8.0;  // lower end of the linear fit of ||.||_p against p
  bool operator==(const FitConfig&) const = default;
};

struct FlowmapConfig {
  std::vector<double> times{0.025, 0.05, 0.1};
  double dt = 2.5e-3;
  int tracers = 128;
  double stencil = 1e-4;
  bool operator==(const FlowmapConfig&) const = default;
};

struct CommutatorConfig {
  int n = 64;
  int trials = 16;
  int iterations = 40;
  int band = 0;
  bool operator==(const CommutatorConfig&) const = default;
};

enum class InitialData { constructed, eigenfunction };

struct EvolveConfig {
  InitialData initial = InitialData::constructed;
  bool operator==(const EvolveConfig&) const = default;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::psweep;
  int n = 512;
  double length = 8.0;
  ConstructionParams params;
  SolverConfig solver;
  SweepConfig sweep;
  FitConfig fit;
  FlowmapConfig flowmap;
  CommutatorConfig commutator;
  EvolveConfig evolve;
  std::uint64_t seed = 1;
  std::string output_dir;  // empty: decided by the caller

  Grid2D grid() const { return make_grid(n, length); }
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parse failure; line() is 1-based, 0 when no line applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

template <class T>
T convert_scalar(const YAML::Node& v, const std::string& key, const char* type) {
  if (!v.IsScalar()) throw ConfigError(line_of(v), "expected " + std::string(type) + " for '" + key + "'");
  try {
    return v.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ConfigError(line_of(v), "expected " + std::string(type) + " for '" + key + "', got '" + v.Scalar() + "'");
  }
}

class Section {
 public:
  Section(const YAML::Node& node, std::string name) : node_(node), name_(std::move(name)) {
    if (!node_.IsMap()) throw ConfigError(line_of(node_), "section '" + name_ + "' must be a mapping");
  }

  template <class T>
  void read(const std::string& key, T& out, const char* type) {
    known_.insert(key);
    if (const auto v = node_[key]) {
      out = convert_scalar<T>(v, key, type);
      lines_[key] = line_of(v);
    }
  }

  void read_list(const std::string& key, std::vector<double>& out) {
    known_.insert(key);
    const auto v = node_[key];
    if (!v) return;
    lines_[key] = line_of(v);
    if (!v.IsSequence() || v.size() == 0) throw ConfigError(line_of(v), "expected a non-empty list of numbers for '" + key + "'");
    out.clear();
    for (const auto& e : v) out.push_back(convert_scalar<double>(e, key, "number"));
  }

  void allow(const std::string& key) { known_.insert(key); }

  void reject_unknown() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!known_.count(key)) throw ConfigError(line_of(kv.first), "unknown key '" + key + "' in " + name_);
    }
  }

  int line(const std::string& key) const {
    const auto it = lines_.find(key);
    return it == lines_.end() ? line_of(node_) : it->second;
  }

 private:
  YAML::Node node_;
  std::string name_;
  std::set<std::string> known_;
  std::map<std::string, int> lines_;
};

// Runs a validator and re-anchors its message at `line`.
inline void anchored(int line, const std::function<void()>& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(line, e.what());
  }
}

}  // namespace detail

/// YAML document with the sections grid, params, solver, sweep, fit,
/// flowmap, commutator, evolve and the top-level keys experiment, seed,
/// output_dir. Missing keys take defaults; unknown keys are errors.
inline ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.mark.line + 1, e.msg);
  }
  ExperimentConfig cfg;
  if (root.IsNull()) throw ConfigError(0, "empty config: 'experiment' is required");
  detail::Section top(root, "top level");

  std::string experiment;
  top.read("experiment", experiment, "string");
  if (experiment.empty()) throw ConfigError(0, "missing required key 'experiment'");
  detail::anchored(top.line("experiment"), [&] { cfg.experiment = parse_experiment(experiment); });
  top.read("seed", cfg.seed, "unsigned integer");
  top.read("output_dir", cfg.output_dir, "string");

  auto section = [&](const char* name, auto&& body) {
    if (const auto n = root[name]) {
      detail::Section s(n, std::string("[") + name + "]");
      body(s);
      s.reject_unknown();
    }
  };
  for (const char* name : {"grid", "params", "solver", "sweep", "fit", "flowmap", "commutator", "evolve"}) top.allow(name);

  int params_line = 0, grid_line = 0, solver_line = 0;
  section("grid", [&](detail::Section& s) {
    s.read("n", cfg.n, "integer");
    s.read("length", cfg.length, "number");
    grid_line = s.line("n");
  });
  section("params", [&](detail::Section& s) {
    s.read("delta", cfg.params.delta, "number");
    s.read("eta", cfg.params.eta, "number");
    s.read("eps", cfg.params.eps, "number");
    s.read("r_inner", cfg.params.cutoff.r_inner, "number");
    s.read("r_outer", cfg.params.cutoff.r_outer, "number");
    params_line = s.line("delta");
  });
  section("solver", [&](detail::Section& s) {
    s.read("cfl", cfg.solver.cfl, "number");
    s.read("t_end", cfg.solver.t_end, "number");
    s.read("k", cfg.solver.k, "integer");
    s.read("dealias", cfg.solver.dealias, "boolean");
    s.read("record_every", cfg.solver.record_every, "integer");
    s.read("track_radius", cfg.solver.track_radius, "number");
    s.read("fixed_dt", cfg.solver.fixed_dt, "number");
    s.read_list("snapshot_p", cfg.solver.snapshot_ps);
    solver_line = s.line("t_end");
  });
  section("sweep", [&](detail::Section& s) {
    s.read_list("p", cfg.sweep.p);
    s.read_list("eps", cfg.sweep.eps);
    s.read_list("a", cfg.sweep.a);
    for (const char* key : {"p", "eps", "a"}) {
      const auto& v = std::string(key) == "p" ? cfg.sweep.p : std::string(key) == "eps" ? cfg.sweep.eps : cfg.sweep.a;
      for (double x : v)
        if (!(x > 0)) throw ConfigError(s.line(key), std::string("sweep values of '") + key + "' must be > 0");
    }
    for (double p : cfg.sweep.p)
      if (p < 1) throw ConfigError(s.line("p"), "exponents must be >= 1");
  });
  section("fit", [&](detail::Section& s) {
    s.read("r_min", cfg.fit.r_min, "number");
    s.read("r_max", cfg.fit.r_max, "number");
    s.read("harmonics", cfg.fit.harmonics, "integer");
    s.read("p_min", cfg.fit.p_min, "number");
    if (cfg.fit.r_min < 0 || !(cfg.fit.r_max > cfg.fit.r_min)) throw ConfigError(s.line("r_max"), "fit window must satisfy 0 <= r_min < r_max");
    if (cfg.fit.harmonics < 0) throw ConfigError(s.line("harmonics"), "harmonics must be >= 0");
  });
  section("flowmap", [&](detail::Section& s) {
    s.read_list("times", cfg.flowmap.times);
    s.read("dt", cfg.flowmap.dt, "number");
    s.read("tracers", cfg.flowmap.tracers, "integer");
    s.read("stencil", cfg.flowmap.stencil, "number");
    if (!(cfg.flowmap.dt > 0)) throw ConfigError(s.line("dt"), "flowmap dt must be > 0");
    if (cfg.flowmap.stencil < 0) throw ConfigError(s.line("stencil"), "stencil must be >= 0");
    detail::anchored(s.line("tracers"), [&] { make_grid(cfg.flowmap.tracers, cfg.length); });
  });
  section("commutator", [&](detail::Section& s) {
    s.read("n", cfg.commutator.n, "integer");
    s.read("trials", cfg.commutator.trials, "integer");
    s.read("iterations", cfg.commutator.iterations, "integer");
    s.read("band", cfg.commutator.band, "integer");
    detail::anchored(s.line("n"), [&] { make_grid(cfg.commutator.n, cfg.length); });
    if (cfg.commutator.trials < 16) throw ConfigError(s.line("trials"), "trials must be >= 16");
    if (cfg.commutator.iterations < 0) throw ConfigError(s.line("iterations"), "iterations must be >= 0");
  });
  section("evolve", [&](detail::Section& s) {
    std::string initial = "constructed";
    s.read("initial", initial, "string");
    if (initial == "constructed")
      cfg.evolve.initial = InitialData::constructed;
    else if (initial == "eigenfunction")
      cfg.evolve.initial = InitialData::eigenfunction;
    else
      throw ConfigError(s.line("initial"), "initial must be 'constructed' or 'eigenfunction', got '" + initial + "'");
  });
  top.reject_unknown();

  detail::anchored(grid_line, [&] { make_grid(cfg.n, cfg.length); });
  detail::anchored(params_line, [&] { cfg.params.validate(); });
  cfg.solver.n = cfg.n;
  detail::anchored(solver_line, [&] { cfg.solver.validate(); });
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(e.line(), path.string() + ": " + e.what());
  }
}

namespace detail {

// Shortest text that reads back to the same double.
inline std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void emit_list(YAML::Emitter& out, const char* key, const std::vector<double>& v) {
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << shortest(x);
  out << YAML::EndSeq;
}

template <class T>
void emit(YAML::Emitter& out, const char* key, const T& v) {
  if constexpr (std::is_same_v<T, double>)
    out << YAML::Key << key << YAML::Value << shortest(v);
  else
    out << YAML::Key << key << YAML::Value << v;
}

}  // namespace detail

/// Fully resolved config as YAML; parse_config(emit_config(c)) == c.
inline std::string emit_config(const ExperimentConfig& c) {
  using detail::emit;
  using detail::emit_list;
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit(out, "experiment", to_string(c.experiment));
  emit(out, "seed", c.seed);
  if (!c.output_dir.empty()) emit(out, "output_dir", c.output_dir);

  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  emit(out, "n", c.n);
  emit(out, "length", c.length);
  out << YAML::EndMap;

  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  emit(out, "delta", c.params.delta);
  emit(out, "eta", c.params.eta);
  emit(out, "eps", c.params.eps);
  emit(out, "r_inner", c.params.cutoff.r_inner);
  emit(out, "r_outer", c.params.cutoff.r_outer);
  out << YAML::EndMap;

  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  emit(out, "cfl", c.solver.cfl);
  emit(out, "t_end", c.solver.t_end);
  emit(out, "k", c.solver.k);
  emit(out, "dealias", c.solver.dealias);
  emit(out, "record_every", c.solver.record_every);
  emit(out, "track_radius", c.solver.track_radius);
  emit(out, "fixed_dt", c.solver.fixed_dt);
  if (!c.solver.snapshot_ps.empty()) emit_list(out, "snapshot_p", c.solver.snapshot_ps);
  out << YAML::EndMap;

  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  emit_list(out, "p", c.sweep.p);
  emit_list(out, "eps", c.sweep.eps);
  emit_list(out, "a", c.sweep.a);
  out << YAML::EndMap;

  out << YAML::Key << "fit" << YAML::Value << YAML::BeginMap;
  emit(out, "r_min", c.fit.r_min);
  emit(out, "r_max", c.fit.r_max);
  emit(out, "harmonics", c.fit.harmonics);
  emit(out, "p_min", c.fit.p_min);
  out << YAML::EndMap;

  out << YAML::Key << "flowmap" << YAML::Value << YAML::BeginMap;
  emit_list(out, "times", c.flowmap.times);
  emit(out, "dt", c.flowmap.dt);
  emit(out, "tracers", c.flowmap.tracers);
  emit(out, "stencil", c.flowmap.stencil);
  out << YAML::EndMap;

  out << YAML::Key << "commutator" << YAML::Value << YAML::BeginMap;
  emit(out, "n", c.commutator.n);
  emit(out, "trials", c.commutator.trials);
  emit(out, "iterations", c.commutator.iterations);
  emit(out, "band", c.commutator.band);
  out << YAML::EndMap;

  out << YAML::Key << "evolve" << YAML::Value << YAML::BeginMap;
  emit(out, "initial", std::string(c.evolve.initial == InitialData::constructed ? "constructed" : "eigenfunction"));
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace eulerlab
