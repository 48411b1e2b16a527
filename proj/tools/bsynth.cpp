// bsynth: Bayesian synthetic control from the command line.
//
//   bsynth fit --config run.json [--out DIR] [--seed N] [--jobs N] [--svg]
//   bsynth placebo --config run.json [...]
//   bsynth simulate --config sim.json [--out DIR] [--seed N]
//   bsynth summarize DIR [--out DIR] [--svg]
//
// Log verbosity: BSYNTH_LOG=error|warn|info|debug.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "bsynth/app.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool svg = false;
};

bsynth::app::Overrides overrides(const CLI::App& cmd, const Flags& f) {
  bsynth::app::Overrides o;
  auto given = [&cmd](const char* name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--out")) o.out = f.out;
  if (given("--seed")) o.seed = f.seed;
  if (given("--jobs")) o.jobs = f.jobs;
  o.svg = f.svg;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian synthetic control with a latent-factor model"};
  app.set_version_flag("--version", bsynth::app::version());
  app.require_subcommand(1);

  Flags f;
  auto add_run_flags = [&f](CLI::App* cmd, bool jobs) {
    cmd->add_option("--config", f.config, "Config file (or a manifest written by a previous run)")->required();
    cmd->add_option("--out", f.out, "Output directory (overrides the config)");
    cmd->add_option("--seed", f.seed, "Random seed (overrides the config)");
    if (jobs) {
      cmd->add_option("--jobs", f.jobs, "Parallel jobs; 0 means one per chain")->check(CLI::NonNegativeNumber);
      cmd->add_flag("--svg", f.svg, "Also write SVG charts");
    }
  };
  auto* fit = app.add_subcommand("fit", "Fit the model and write draws, summaries and gaps");
  add_run_flags(fit, true);
  auto* placebo = app.add_subcommand("placebo", "Refit with each donor treated in turn");
  add_run_flags(placebo, true);
  auto* simulate = app.add_subcommand("simulate", "Generate a panel with a known effect");
  add_run_flags(simulate, false);
  std::string fit_dir;
  auto* summarize = app.add_subcommand("summarize", "Rebuild summaries and charts from a fit directory");
  summarize->add_option("dir", fit_dir, "Directory written by fit")->required();
  summarize->add_option("--out", f.out, "Output directory (default: the fit directory)");
  summarize->add_flag("--svg", f.svg, "Also write SVG charts");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) {
      bsynth::app::cmd_fit(f.config, overrides(*fit, f));
    } else if (*placebo) {
      bsynth::app::cmd_placebo(f.config, overrides(*placebo, f));
    } else if (*simulate) {
      bsynth::app::cmd_simulate(f.config, overrides(*simulate, f));
    } else if (*summarize) {
      bsynth::app::cmd_summarize(fit_dir, overrides(*summarize, f));
    }
  } catch (const std::exception& e) {
    std::cerr << bsynth::app::error_record(e).dump() << '\n';
    return 1;
  }
  return 0;
}
