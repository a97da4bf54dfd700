// Command-line runner: one subcommand per experiment.
//
//   caa <experiment> [--config FILE] [--seed N] [--out DIR] [--jobs N]
//                    [--set key.path=value ...] [--print-config]
//
// Exit codes: 0 success, 2 configuration error, 1 any other failure.
// CLI11 reports its own usage errors with its own nonzero codes.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "caa/config.hpp"
#include "caa/experiments.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
  std::vector<std::string> assignments;
  bool print_config = false;
};

int run(caa::cli::Experiment experiment, const Options& opts) {
  using namespace caa;
  try {
    nlohmann::json tree = nlohmann::json::object();
    if (!opts.config_path.empty()) tree = cli::load_config_file(opts.config_path);
    const auto cfg = cli::resolve_config(experiment, tree, {opts.seed, opts.out, opts.jobs, opts.assignments});
    if (opts.print_config) {
      std::cout << cfg.values.dump(2) << '\n';
      return 0;
    }
    const auto output = experiments::run_experiment(cfg);
    experiments::write_outputs(cfg.output_dir(), cfg, output);
    std::cerr << "caa " << cli::to_string(experiment) << ": wrote " << output.files.size() + 1 << " files to "
              << cfg.output_dir() << '\n';
    return 0;
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regret-dispersion experiments: U-curve, relativistic gaps, budget ladders, coders, info checks"};
  app.set_version_flag("--version", std::string("caa ") + CAA_VERSION);
  app.require_subcommand(1);

  Options opts;
  std::optional<caa::cli::Experiment> chosen;
  for (auto experiment : caa::cli::all_experiments()) {
    auto* sub = app.add_subcommand(caa::cli::to_string(experiment), "run the " + caa::cli::to_string(experiment) +
                                                                        " experiment");
    sub->add_option("--config", opts.config_path, "YAML/JSON config or a previous run's manifest.json")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "master seed");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--set", opts.assignments, "override a config key, e.g. --set ucurve.p_grid=[0,0.5,1]");
    sub->add_flag("--print-config", opts.print_config, "print the resolved config and exit");
    sub->callback([&chosen, experiment] { chosen = experiment; });
  }

  CLI11_PARSE(app, argc, argv);
  return chosen ? run(*chosen, opts) : 1;
}
