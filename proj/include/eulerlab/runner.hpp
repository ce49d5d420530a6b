#pragma once

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "eulerlab/config.hpp"
#include "eulerlab/field_io.hpp"
#include "eulerlab/pipelines.hpp"
#include "json.hpp"

#ifndef EULERLAB_VERSION
#define EULERLAB_VERSION "0.0.0"
#endif

namespace eulerlab {

inline constexpr const char* output_dir_env = "EULERLAB_OUT";

struct OutputFile {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string version = EULERLAB_VERSION;
  Experiment experiment = Experiment::psweep;
  std::string config;  // resolved config, YAML
  std::string started, finished;
  double wall_seconds = 0.0;
  std::filesystem::path directory;
  std::vector<OutputFile> outputs;
  std::vector<Check> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct RunOptions {
  std::string output_dir;  // overrides the config and the environment
  int jobs = 0;
};

/// Pipeline failure tagged with the module it came from.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& module, const std::string& what) : std::runtime_error(module + ": " + what), module_(module) {}
  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

inline std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("SHA-256 init failed");
  std::vector<char> buf(1 << 16);
  while (is) {
    is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

namespace detail {

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Writes one artifact and remembers it for the manifest.
class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void text(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(dir_ / name);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    body(os);
    os.close();
    names_.push_back(name);
  }

  void field(const std::string& name, const ScalarField& f, const std::string& id, const nlohmann::json& meta) {
    write_field(dir_ / name, f, id, meta);
    names_.push_back(name);
  }

  std::vector<OutputFile> finish() const {
    std::vector<OutputFile> out;
    for (const auto& n : names_) out.push_back({n, sha256_file(dir_ / n), std::filesystem::file_size(dir_ / n)});
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

template <class Fn>
auto in_module(const std::string& module, Fn&& fn) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(module, e.what());
  }
}

inline nlohmann::json params_json(const ConstructionParams& p) {
  return {{"delta", p.delta}, {"eta", p.eta}, {"eps", p.eps}, {"r_inner", p.cutoff.r_inner}, {"r_outer", p.cutoff.r_outer}};
}

inline std::string eps_tag(double e) {
  std::ostringstream os;
  os << e;
  return os.str();
}

inline void write_json(Outputs& out, const std::string& name, const nlohmann::json& j) {
  out.text(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

}  // namespace detail

/// Output directory: explicit option, then the config, then $EULERLAB_OUT,
/// then ./eulerlab-out.
inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!opt.output_dir.empty()) return opt.output_dir;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(output_dir_env); env && *env) return env;
  return "eulerlab-out";
}

inline RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  RunManifest man;
  man.experiment = cfg.experiment;
  man.config = emit_config(cfg);
  man.started = detail::utc_now();
  man.directory = resolve_output_dir(cfg, opt);
  const auto t0 = std::chrono::steady_clock::now();
  detail::Outputs out(man.directory);
  out.text("config.yaml", [&](std::ostream& os) { os << man.config; });
  const auto g = cfg.grid();
  const auto& p = cfg.params;
  const nlohmann::json meta{{"params", detail::params_json(p)}};

  switch (cfg.experiment) {
    case Experiment::construct: {
      const auto grad = detail::in_module("construction", [&] { return exact_gradient(p, g); });
      const auto u = ScalarField::sample(g, [&](double x, double y) { return velocity_u0(p, x, y)[0]; });
      const auto v = ScalarField::sample(g, [&](double x, double y) { return velocity_u0(p, x, y)[1]; });
      const auto det = det_grad(grad);
      const auto hess = detail::in_module("spectral_core", [&] { return apply(riesz_symbol(2, 2), det); });
      out.field("u.field", u, "u", meta);
      out.field("v.field", v, "v", meta);
      out.field("omega.field", grad.vx - grad.uy, "omega", meta);
      out.field("det_grad.field", det, "det_grad", meta);
      out.field("R22_det.field", hess, "R22_det", meta);
      const auto J = remainder_J(det, p);
      detail::write_json(out, "construct.json",
                         {{"grad_sup", gradient_sup_norm(grad)},
                          {"omega_sup", (grad.vx - grad.uy).max_abs()},
                          {"remainder_J_over_delta2", J.sup_estimate},
                          {"remainder_H_sup", remainder_H(1e-3, 0.5).sup_estimate},
                          {"params", detail::params_json(p)}});
      man.checks.push_back({"construct", true, "grad sup " + detail::num(gradient_sup_norm(grad))});
      break;
    }
    case Experiment::fit_log: {
      const auto r = detail::in_module("analysis", [&] { return run_fit_log(p, g, cfg.fit.r_min, cfg.fit.r_max, cfg.fit.harmonics); });
      out.text("fit.csv", [&](std::ostream& os) {
        write_fit_csv(os, {{"R22_det", r.hessian}, {"dxxyy_G_closed", r.closed_dxxyy}});
      });
      out.text("logfit_samples.csv", [&](std::ostream& os) {
        os << "field_id,log_r2,value\n" << std::setprecision(17);
        for (const auto& s : r.samples) os << "R22_det," << s[0] << ',' << s[1] << '\n';
      });
      man.checks.push_back(check_fit_log(r));
      break;
    }
    case Experiment::psweep: {
      const auto r = detail::in_module("analysis", [&] { return run_psweep(p, g, cfg.sweep.p, cfg.fit.p_min, opt.jobs); });
      out.text("norms.csv", [&](std::ostream& os) { write_norm_series_csv(os, {r.series}); });
      out.text("norms_fit.csv", [&](std::ostream& os) { write_fit_csv(os, {{r.series.field_id, r.linear}}); });
      man.checks.push_back(check_psweep(r));
      break;
    }
    case Experiment::evolve: {
      auto solver = cfg.solver;
      solver.n = cfg.n;
      if (cfg.evolve.initial == InitialData::eigenfunction) {
        const auto rec = detail::in_module("euler_solver", [&] { return evolve_and_track(steady_eigenfunction(g), solver); });
        out.text("growth.csv", [&](std::ostream& os) { write_growth_csv(os, rec); });
        out.text("growth_diagnostics.csv", [&](std::ostream& os) { write_growth_diagnostics_csv(os, rec); });
        out.field("omega_final.field", *rec.final_vorticity, "omega", {{"t", rec.times.back()}});
        man.checks.push_back(check_steady(rec));
        man.checks.push_back({"energy/enstrophy drift", rec.energy_drift() <= 1e-6 && rec.enstrophy_drift() <= 1e-6,
                              detail::num(rec.energy_drift()) + ", " + detail::num(rec.enstrophy_drift())});
      } else {
        const auto runs = detail::in_module("euler_solver", [&] { return run_growth_family(p, solver, cfg.sweep.eps, cfg.length); });
        nlohmann::json summary = nlohmann::json::array();
        for (const auto& r : runs) {
          const auto tag = detail::eps_tag(r.eps);
          out.text("growth_eps" + tag + ".csv", [&](std::ostream& os) { write_growth_csv(os, r.record); });
          out.text("growth_diagnostics_eps" + tag + ".csv", [&](std::ostream& os) { write_growth_diagnostics_csv(os, r.record); });
          out.field("omega_final_eps" + tag + ".field", *r.record.final_vorticity, "omega",
                    {{"t", r.record.times.back()}, {"eps", r.eps}, {"params", detail::params_json(p)}});
          summary.push_back({{"eps", r.eps},
                             {"steps", r.record.steps},
                             {"sup_increase", sup_increase(r.record)},
                             {"window_increment", window_increment(r.record)},
                             {"energy_drift", r.record.energy_drift()},
                             {"resolution_loss", r.record.resolution_loss}});
        }
        detail::write_json(out, "evolve.json", summary);
        man.checks.push_back(check_growth_family(runs));
      }
      break;
    }
    case Experiment::flowmap: {
      const auto r = detail::in_module("lagrange", [&] {
        return run_flowmap(p, g, cfg.flowmap.times, cfg.flowmap.dt, cfg.flowmap.tracers, cfg.flowmap.stencil, opt.jobs);
      });
      out.text("lipschitz.csv", [&](std::ostream& os) { write_lipschitz_csv(os, r.reports); });
      detail::write_json(out, "flowmap.json",
                         {{"u_lip", r.u_lip}, {"jacobian_dev", r.jacobian_dev}, {"seam_crossed", r.seam_crossed}});
      man.checks.push_back(check_flowmap(r));
      break;
    }
    case Experiment::commutator: {
      const auto cg = make_grid(cfg.commutator.n, cfg.length);
      const OpnormOptions o{cfg.commutator.iterations, cfg.commutator.band, opt.jobs};
      const auto runs = detail::in_module("lagrange", [&] {
        return run_commutator(cg, cfg.sweep.a, cfg.sweep.p, cfg.commutator.trials, cfg.seed, o);
      });
      std::vector<CommutatorEstimate> rows;
      for (const auto& r : runs) rows.insert(rows.end(), r.estimates.begin(), r.estimates.end());
      out.text("commutator.csv", [&](std::ostream& os) { write_commutator_csv(os, rows); });
      man.checks.push_back(check_commutator(runs));
      break;
    }
  }

  man.finished = detail::utc_now();
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man.outputs = out.finish();

  nlohmann::json j{{"version", man.version},
                   {"experiment", to_string(man.experiment)},
                   {"config", man.config},
                   {"grid", {{"n", cfg.n}, {"length", cfg.length}}},
                   {"params", detail::params_json(p)},
                   {"started", man.started},
                   {"finished", man.finished},
                   {"wall_seconds", man.wall_seconds},
                   {"outputs", nlohmann::json::array()},
                   {"checks", nlohmann::json::array()}};
  for (const auto& f : man.outputs) j["outputs"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  for (const auto& c : man.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  std::ofstream(man.directory / "manifest.json") << j.dump(2) << '\n';
  return man;
}

/// Names of manifest outputs that are missing or whose checksum differs.
inline std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw std::runtime_error("no manifest in " + dir.string());
  const auto j = nlohmann::json::parse(is);
  std::vector<std::string> bad;
  for (const auto& f : j.at("outputs")) {
    const auto path = dir / f.at("path").get<std::string>();
    if (!std::filesystem::exists(path) || sha256_file(path) != f.at("sha256").get<std::string>())
      bad.push_back(f.at("path").get<std::string>());
  }
  return bad;
}

}  // namespace eulerlab
