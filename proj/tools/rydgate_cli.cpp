#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "rydgate/runner.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  int jobs = 0;
  std::string channels;
};

void add_common(CLI::App& command, CommonOptions& options, bool needs_output) {
  command.add_option("--config", options.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  command.add_option("--channels", options.channels, "loss channels: all, none or a comma list of "
                                                     "depopulation,optical_pumping,cpt,rydberg_decay");
  if (!needs_output) return;
  command.add_option("--out", options.out, "output directory (overrides output_dir)");
  command.add_option("--jobs", options.jobs, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
}

rydgate::RunConfig resolve(const CommonOptions& options) {
  auto config = rydgate::load_config(options.config);
  if (!options.out.empty()) config.output_dir = options.out;
  if (!options.channels.empty()) config.channels = rydgate::parse_channels(options.channels);
  config.validate();
  return config;
}

int run(const CommonOptions& options, rydgate::TaskKind kind) {
  const auto config = resolve(options);
  const auto results = rydgate::run_sweep(config, kind, options.jobs);
  for (const auto& task : results.tasks)
    if (!task.ok()) std::cerr << "error: " << task.error << "\n";
  for (const auto& path : rydgate::emit_outputs(results, config)) std::cout << path.string() << "\n";
  return results.all_ok() ? EXIT_SUCCESS : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg blockade gate simulator"};
  app.require_subcommand(1);

  CommonOptions sweep_options, truth_options, tomography_options, validate_options;
  auto* sweep = app.add_subcommand("sweep", "fidelity and purity over the configured sweep");
  add_common(*sweep, sweep_options, true);
  auto* truth = app.add_subcommand("truth-table", "CNOT truth tables over the configured sweep");
  add_common(*truth, truth_options, true);
  auto* tomography = app.add_subcommand("tomography", "CNOT process matrix and closest unitary");
  add_common(*tomography, tomography_options, true);
  auto* validate = app.add_subcommand("validate-config", "check a configuration and print it fully resolved");
  add_common(*validate, validate_options, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return run(sweep_options, rydgate::TaskKind::sweep);
    if (*truth) return run(truth_options, rydgate::TaskKind::truth_table);
    if (*tomography) return run(tomography_options, rydgate::TaskKind::tomography);
    const auto config = resolve(validate_options);
    std::cout << rydgate::to_json(config).dump(2) << "\n"
              << rydgate::SweepSpec::from_config(config).points.size() << " sweep point(s)\n";
  } catch (const rydgate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return EXIT_SUCCESS;
}
