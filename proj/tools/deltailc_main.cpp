// Command-line front end: freq-map, design-shaper, run, compare.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "deltailc/config.hpp"
#include "deltailc/errors.hpp"
#include "deltailc/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::vector<std::string> set;
  long long seed = -1;
  int parallel = 0;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "random seed")->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", o.set, "override, e.g. --set trajectory.kind=square (repeatable)");
  cmd->add_option("--parallel", o.parallel, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delta robot vibration-aware iterative learning control experiments"};
  app.require_subcommand(1);
  Options o;
  CLI::App* freq = app.add_subcommand("freq-map", "first natural frequency over the workspace");
  CLI::App* design = app.add_subcommand("design-shaper", "grid-search the three-impulse shaper");
  CLI::App* run = app.add_subcommand("run", "shaper design plus iterative learning runs for one controller");
  CLI::App* compare = app.add_subcommand("compare", "run several controllers on the same plant and reference");
  CLI::App* dump = app.add_subcommand("print-config", "print the resolved configuration");
  for (CLI::App* c : {freq, design, run, compare, dump}) add_common(c, o);
  CLI11_PARSE(app, argc, argv);

  // Flags win over the file and over --set.
  std::vector<std::string> overrides = o.set;
  if (!o.out.empty()) overrides.push_back("out_dir=" + nlohmann::json(o.out).dump());
  if (o.seed >= 0) overrides.push_back("seed=" + std::to_string(o.seed));
  if (o.parallel > 0) overrides.push_back("parallel=" + std::to_string(o.parallel));

  deltailc::ExperimentConfig config;
  try {
    config = deltailc::load_config(o.config, overrides);
  } catch (const deltailc::Error& e) {
    std::cerr << "deltailc: " << deltailc::to_string(e.kind()) << ": " << e.what() << '\n';
    return 2;
  }

  if (*dump) {
    std::cout << config.resolved.dump(2) << '\n';
    return 0;
  }
  if (*freq) return deltailc::cmd_freq_map(config);
  if (*design) return deltailc::cmd_design_shaper(config);
  if (*run) return deltailc::cmd_run(config);
  return deltailc::cmd_compare(config);
}
