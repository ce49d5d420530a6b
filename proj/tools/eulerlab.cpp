#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "eulerlab/runner.hpp"

using namespace eulerlab;

namespace {

struct Common {
  std::string config;
  std::string out;
  int jobs = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool check = false;
  bool print_config = false;
};

int run(Experiment which, const Common& c) {
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    cfg = load_config(c.config);
    if (cfg.experiment != which)
      throw ConfigError(0, c.config + " configures '" + to_string(cfg.experiment) + "', not '" + to_string(which) + "'");
  } else {
    cfg.experiment = which;
  }
  if (c.seed_set) cfg.seed = c.seed;
  if (c.print_config) {
    std::cout << emit_config(cfg);
    return 0;
  }
  const auto man = run_experiment(cfg, {c.out, c.jobs});
  for (const auto& ck : man.checks) std::cout << (ck.pass ? "PASS " : "FAIL ") << ck.name << ": " << ck.detail << '\n';
  std::cout << "wrote " << man.outputs.size() << " files to " << man.directory.string() << " in " << man.wall_seconds << " s\n";
  return c.check && !man.passed() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eulerlab: C^k ill-posedness laboratory for 2D incompressible Euler"};
  app.set_version_flag("--version", EULERLAB_VERSION);
  app.require_subcommand(1);
  Common c;
  Experiment chosen = Experiment::psweep;

  for (auto [e, name] : experiment_names) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " pipeline");
    sub->add_option("--config", c.config, "YAML config (defaults apply to missing keys)")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, std::string("output directory (default: config, then $") + output_dir_env + ")");
    sub->add_option("--jobs", c.jobs, "parallel jobs (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) {
      c.seed = s;
      c.seed_set = true;
    }, "random seed override");
    sub->add_flag("--check", c.check, "exit 1 when the pipeline's acceptance check fails");
    sub->add_flag("--print-config", c.print_config, "print the resolved config and exit");
    sub->callback([&chosen, e = e] { chosen = e; });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    return run(chosen, c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
