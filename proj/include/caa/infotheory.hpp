#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "caa/sequence.hpp"
#include "caa/sources.hpp"

namespace caa::infotheory {

/// Plug-in estimate of H(X_t | X_{t-1}, ..., X_{t-m}) in bits.
struct EntropyEstimate {
  unsigned order = 0;
  double value = 0.0;
  std::size_t n_contexts = 0;   // distinct contexts observed
  std::size_t n_samples = 0;    // scored positions
  bool undersampled = false;    // fewer than 10 samples per possible context
  bool no_repeated_context = false;
  std::string estimator = "plugin";
};

/// Counts (context, next) pairs over positions t = start .. n-1 where
/// `start` defaults to m (the first position with a full context). Orders
/// with alphabet^m > 2^26 are rejected.
EntropyEstimate empirical_conditional_entropy(const SymbolSequence& sequence, unsigned m,
                                              std::optional<std::size_t> start = std::nullopt);

/// H(X_t | ctx m-1) - H(X_t | ctx m), both counted over positions t >= start
/// (default m). Pass a shared start >= M to make atoms 1..M sum exactly to
/// H(X_t) - H(X_t | ctx M) over that common range.
double cmi_atom(const SymbolSequence& sequence, unsigned m, std::optional<std::size_t> start = std::nullopt);

struct CmiAtomSeries {
  std::vector<double> atoms_raw;   // m = 1..M
  std::vector<double> atoms;       // clamped at 0
  std::vector<double> partial_sums;  // of clamped atoms
  std::vector<double> conditional_entropies;  // H(X_t | ctx m), m = 0..M
  double truncated_excess_entropy = 0.0;  // H(X_t) - H(X_t | ctx M)
};

/// All orders 0..M are counted over the same positions t >= M, so the atoms
/// telescope exactly and each is nonnegative up to rounding.
CmiAtomSeries excess_entropy_truncated(const SymbolSequence& sequence, unsigned max_order);

/// "m,atom_raw,atom_clamped,partial_sum" rows.
std::string atoms_csv(const CmiAtomSeries& series);

// -- analytic oracles ---------------------------------------------------------

using Matrix = std::vector<std::vector<double>>;

/// Stationary distribution of an irreducible row-stochastic matrix.
/// Throws std::invalid_argument for reducible (non-ergodic) chains.
std::vector<double> stationary_distribution(const Matrix& transition);

/// sum_i pi_i H(row_i).
double markov_entropy_rate(const Matrix& transition);

/// Exact H(X_t | X_{t-1}, ..., X_{t-m}) for a stationary two-state HMM, by
/// enumerating all 2^m output contexts with the forward recursion.
double hmm_conditional_entropy(const sources::HmmParams& params, unsigned m);

/// H(X_t | X_{t-1}) of the stationary HMM.
double hmm_pair_conditional_entropy(const sources::HmmParams& params);

/// Exact H(X_t) and entropy rate of an order-K chain (via its first-order
/// lift on alphabet^K states); excess entropy = marginal - rate.
struct ChainEntropies {
  double marginal = 0.0;
  double rate = 0.0;
  double excess() const noexcept { return marginal - rate; }
};
ChainEntropies markov_chain_entropies(const sources::MarkovChainParams& params);

double binary_entropy(double p);

}  // namespace caa::infotheory
