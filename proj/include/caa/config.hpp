#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace caa::cli {

enum class Experiment { ucurve, relativistic, crypto_ladder, ca_ladder, coders, infocheck };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);
const std::vector<Experiment>& all_experiments();

/// Any violation of the configuration contract; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved configuration of one run.
///
/// Layout (YAML or JSON):
///   experiment, seed, jobs, output_dir, n, replicates, alpha, burn_in
///   <experiment name>: { experiment-specific keys }
/// Missing keys take the defaults of `default_config`.
struct ExperimentConfig {
  Experiment experiment = Experiment::ucurve;
  nlohmann::json values;  // merged tree, including defaults

  std::uint64_t seed() const { return values.at("seed").get<std::uint64_t>(); }
  std::size_t n() const { return values.at("n").get<std::size_t>(); }
  std::size_t replicates() const { return values.at("replicates").get<std::size_t>(); }
  double alpha() const { return values.at("alpha").get<double>(); }
  std::size_t burn_in() const { return values.at("burn_in").get<std::size_t>(); }
  unsigned jobs() const { return values.at("jobs").get<unsigned>(); }
  std::string output_dir() const { return values.at("output_dir").get<std::string>(); }
  /// The experiment-specific section.
  const nlohmann::json& section() const { return values.at(to_string(experiment)); }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  /// Canonical serialization, the input of config_hash(). Leaves out `jobs`
  /// and `output_dir`, which do not change any result.
  std::string canonical() const;
  std::uint64_t config_hash() const;
};

nlohmann::json default_config(Experiment e);

/// Parses YAML (a JSON document is valid YAML). A run manifest is accepted
/// too: its embedded "config" object is used.
nlohmann::json load_config_file(const std::filesystem::path& path);
nlohmann::json parse_config_text(const std::string& text);

/// Applies "dotted.key=value"; the value is parsed as a YAML scalar or list.
void apply_override(nlohmann::json& tree, const std::string& assignment);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<unsigned> jobs;
  std::vector<std::string> assignments;
};

/// defaults <- file tree <- overrides, then validate().
ExperimentConfig resolve_config(Experiment e, const nlohmann::json& file_tree = {},
                                const Overrides& overrides = {});

}  // namespace caa::cli
