#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caa/coders.hpp"
#include "caa/observers.hpp"
#include "caa/sequence.hpp"

namespace caa::evaluation {

using observers::ObserverSpec;

/// Finite-sample average loss (bits/symbol) of one observer on one sequence.
struct LossReport {
  ObserverSpec observer;
  double avg_loss = 0.0;
  std::size_t n_scored = 0;
  std::size_t burn_in = 0;
  std::uint64_t sequence_id = 0;  // SymbolSequence::fingerprint()
};

struct RegretEntry {
  ObserverSpec observer;
  double avg_loss = 0.0;
  double regret = 0.0;
};

/// Regret of every observer relative to the best one in the set.
struct RegretTable {
  std::vector<RegretEntry> entries;
  double l_star = 0.0;
};

/// Dispersion of regret under a prior over the observers.
struct CAAResult {
  double variance = 0.0;  // bits^2
  double max_gap = 0.0;   // bits
  std::vector<double> prior;
};

/// Single left-to-right pass: at step t score -log2 P(x_t) when t >= burn_in,
/// then update. `observer` must be fresh.
LossReport average_log_loss(observers::Observer& observer, const SymbolSequence& sequence,
                            std::size_t burn_in, const ObserverSpec& spec = {});

/// Builds a fresh observer from `spec` and evaluates it.
LossReport average_log_loss(const ObserverSpec& spec, const SymbolSequence& sequence, std::size_t burn_in);

/// Codelength per symbol as the loss (no burn-in).
LossReport codelength_report(coders::Coder coder, const SymbolSequence& sequence);

/// Reports must share sequence_id and burn_in.
RegretTable regret_table(std::span<const LossReport> reports);

/// Regret table straight from losses (observers labelled by position).
RegretTable regret_table_from_losses(std::span<const double> losses);

/// Empty prior means uniform. Throws unless the prior has one entry per
/// observer, nonnegative, summing to 1 within 1e-9.
CAAResult caa_variance(const RegretTable& table, std::span<const double> prior = {});
double caa_max(const RegretTable& table);

/// p (1 - p) dL^2, the variance of a two-point regret {0, dL} with prior p on
/// the worse observer.
double two_alg_closed_form(double delta_loss, double p);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

void to_json(nlohmann::json& j, const LossReport& r);
void to_json(nlohmann::json& j, const RegretTable& t);
void to_json(nlohmann::json& j, const CAAResult& c);

/// Flat CSV: one row per observer for a replicate.
std::string regret_csv_header();
std::string regret_csv_rows(const RegretTable& table, const std::string& source, std::size_t replicate);

}  // namespace caa::evaluation
