#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caa/config.hpp"

namespace caa::experiments {

/// Everything one run produces, held in memory until it is written.
/// `files` maps a file name (relative to the output directory) to its content.
struct RunOutput {
  std::map<std::string, std::string> files;
  nlohmann::json summary = nlohmann::json::object();
};

RunOutput run_ucurve(const cli::ExperimentConfig& config);
RunOutput run_relativistic(const cli::ExperimentConfig& config);
RunOutput run_crypto_ladder(const cli::ExperimentConfig& config);
RunOutput run_ca_ladder(const cli::ExperimentConfig& config);
RunOutput run_coders(const cli::ExperimentConfig& config);
RunOutput run_infocheck(const cli::ExperimentConfig& config);
RunOutput run_experiment(const cli::ExperimentConfig& config);

/// Frozen CSV headers, keyed by file name. Per-key files use a `{}`
/// placeholder (e.g. "crypto_ladder_m{}.csv").
const std::map<std::string, std::string>& csv_schemas();
/// Header line expected for an output file name, or "" if it is not a CSV
/// of any experiment.
std::string schema_for(const std::string& file_name);

/// Run metadata: config hash, seed, RNG algorithm, library versions, the
/// resolved config and an FNV-1a digest of every output file. Contains no
/// timestamps, so reruns produce identical manifests.
nlohmann::json make_manifest(const cli::ExperimentConfig& config, const RunOutput& output);

/// Writes every output file and manifest.json into `dir`. Each file is
/// written to a temporary sibling first and renamed into place.
void write_outputs(const std::filesystem::path& dir, const cli::ExperimentConfig& config,
                   const RunOutput& output);

/// Runs fn(0..count-1) on up to `jobs` threads. Callers store results by
/// index, so the merged output does not depend on scheduling. The first
/// exception thrown by any task is rethrown.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn);

}  // namespace caa::experiments
