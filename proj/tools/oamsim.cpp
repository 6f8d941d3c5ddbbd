// oamsim: batch runner for the OAM backhaul simulator.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oam/config_io.hpp"
#include "oam/experiments.hpp"
#include "oam/parallel.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out = ".";
  bool exact_channel = false;
  bool single_thread = false;
  int threads = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  auto* cfg = cmd->add_option("--config", a.config, "scenario/experiment JSON file")->check(CLI::ExistingFile);
  auto* pre = cmd->add_option("--preset", a.preset, "named preset (see list-presets)");
  cfg->excludes(pre);
  cmd->add_option("--seed", a.seed, "master seed");
  cmd->add_option("--trials", a.trials, "trials per sweep point")->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "output directory")->capture_default_str();
  cmd->add_flag("--exact-channel", a.exact_channel, "generate the physical channel from exact distances");
  cmd->add_flag("--single-thread", a.single_thread, "run every stage on one thread");
  cmd->add_option("--threads", a.threads, "maximum worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  cmd->add_flag("-q,--quiet", a.quiet, "no progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-user OAM backhaul simulator"};
  app.require_subcommand(1);
  CommonArgs args;

  struct Entry {
    const char* name;
    oam::Pipeline pipeline;
    const char* help;
  };
  const Entry entries[] = {
      {"estimate", oam::Pipeline::estimate, "estimate user range and angles from uplink training"},
      {"precoder-dump", oam::Pipeline::precoder_dump, "per-carrier decoupling residuals of the precoder"},
      {"ber", oam::Pipeline::ber, "Monte-Carlo bit error rate vs SNR"},
      {"se", oam::Pipeline::se, "spectral efficiency vs SNR"},
      {"ee", oam::Pipeline::ee, "energy efficiency vs transmit power"},
      {"channel-dump", oam::Pipeline::channel_dump, "per-carrier channel matrices"},
      {"complexity", oam::Pipeline::complexity, "operation-count estimates"},
  };
  std::vector<std::pair<CLI::App*, oam::Pipeline>> commands;
  for (const auto& e : entries) {
    auto* cmd = app.add_subcommand(e.name, e.help);
    add_common(cmd, args);
    commands.emplace_back(cmd, e.pipeline);
  }
  auto* list = app.add_subcommand("list-presets", "print preset names and descriptions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const auto& p : oam::list_presets()) std::cout << p.name << "\t" << p.description << "\n";
    return 0;
  }

  oam::Pipeline pipeline = oam::Pipeline::estimate;
  for (const auto& [cmd, p] : commands)
    if (cmd->parsed()) pipeline = p;

  oam::ExperimentSpec spec;
  try {
    if (args.config.empty() == args.preset.empty())
      throw oam::ParseError("exactly one of --config or --preset is required");
    spec = args.preset.empty() ? oam::load_experiment(args.config) : oam::preset(args.preset);
    spec.pipeline = pipeline;
    if (args.seed) spec.seed = *args.seed;
    if (args.trials) spec.trials = *args.trials;
    if (args.exact_channel) spec.exact_channel = true;
    std::vector<oam::ValidationWarning> warnings;
    spec.scenario = oam::validate_config(spec.scenario, {}, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w.message << "\n";
  } catch (const std::exception& e) {
    std::cerr << "oamsim: config error: " << e.what() << "\n";
    return 2;
  }

  oam::set_max_threads(args.single_thread ? 1 : args.threads);
  oam::RunOptions options;
  if (!args.quiet) options.progress = [](const std::string& s) { std::cerr << "[oamsim] " << s << "\n"; };
  try {
    const auto summary = oam::run_experiment(spec, args.out, options);
    std::cout << summary.path << " (" << summary.rows << " rows)\n";
  } catch (const std::exception& e) {
    std::cerr << "oamsim: " << oam::to_string(pipeline) << " failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
