// qhdsim: run one experiment from a JSON config and write its results.
//
// Exit codes: 0 success, 1 configuration error, 2 solver error,
// 3 failed assertion (only with --assert).

#include "qhd/error.hpp"
#include "qhd/experiments.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <string>

namespace {

struct Options {
  std::string config;
  std::string out;
  bool assert_flags = false;
};

int run(const std::string& experiment, const Options& opt) {
  try {
    qhd::ExperimentConfig cfg = qhd::load_config(opt.config);
    cfg.experiment = experiment;
    const qhd::RunOutput result = qhd::run_experiment(cfg);
    qhd::write_run(opt.out, cfg, result);
    fmt::print("{}: wrote {}\n", experiment, opt.out);
    for (const auto& [key, value] : result.pass_flags.items()) {
      fmt::print("  {:<32} {}\n", key, value.dump());
    }
    if (opt.assert_flags && !result.all_passed()) {
      fmt::print(stderr, "{}: assertion failed\n", experiment);
      return 3;
    }
    return 0;
  } catch (const qhd::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return e.kind() == qhd::ErrorKind::Config ? 1 : 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic quantum hydrodynamics simulation and verification suite"};
  app.require_subcommand(1);
  Options opt;
  const char* names[][2] = {
      {"simulate", "Run one solver and record diagnostics"},
      {"sweep", "Relaxation-time sweep against the drift-diffusion limit"},
      {"decay", "Entropy decay of the Lyapunov functional"},
      {"layer", "Initial-layer study for well- and ill-prepared data"},
      {"validate", "Wave-function vs hydrodynamic solver refinement table"},
  };
  for (const auto& [name, help] : names) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "Output directory")->required();
    sub->add_flag("--assert", opt.assert_flags, "Exit with 3 when a pass flag is false");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return run(app.get_subcommands().front()->get_name(), opt);
}
