#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "caa/rng.hpp"
#include "caa/sequence.hpp"

namespace caa::sources {

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Two-state hidden Markov model with binary emissions.
struct HmmParams {
  Matrix2 transition{};  // transition[s][s']
  Matrix2 emission{};    // emission[s][x]

  void validate() const;
  /// Sticky transitions (0.98 / 0.02) with biased emissions (0.85 / 0.15).
  static HmmParams sticky_default();
};

struct CryptoParams {
  std::vector<std::uint8_t> key;  // bits, length m >= 1
  std::size_t prefix_len = 64;
  bool reveal = true;

  void validate() const;
  std::size_t body_start() const noexcept { return prefix_len + (reveal ? key.size() : 0); }
  /// Period of the ciphertext body, lcm(2, m).
  std::size_t body_period() const noexcept;
};

struct EcaSpec {
  int rule = 110;
  std::size_t width = 0;
  std::size_t steps = 0;
  // Boundary is always periodic (wrap).

  void validate() const;
};

/// Order-K chain over an alphabet: row c of `next` is P(X_t = . | context c),
/// context encoded base-alphabet with the most recent symbol least significant.
struct MarkovChainParams {
  unsigned alphabet_size = 2;
  unsigned order = 1;
  std::vector<std::vector<double>> next;

  void validate() const;
  /// Binary order-1 chain that flips its previous symbol with probability `flip`.
  static MarkovChainParams binary_flip(double flip);
};

/// Mixture of a periodic template and fair coin flips. The template phase is
/// a clock that advances every step; `phase` defaults to a uniformly random
/// start drawn from the seed.
SymbolSequence gen_periodic_noise(std::span<const std::uint8_t> tmpl, double p, std::size_t n,
                                  std::uint64_t seed,
                                  std::optional<std::size_t> phase = std::nullopt);

/// Hidden state starts from the stationary distribution of `params.transition`.
SymbolSequence gen_hmm(const HmmParams& params, std::size_t n, std::uint64_t seed,
                       std::optional<int> initial_state = std::nullopt);

/// [prefix of fair bits] ++ [key if reveal] ++ [c_t = (t mod 2) xor key[t mod m]].
/// The descriptor's body_start marks where the ciphertext body begins.
SymbolSequence gen_xor_crypto(const CryptoParams& params, std::size_t n, std::uint64_t seed);

/// i.i.d. fair key bits of length m with no proper period dividing m, so the
/// keystream's least period is exactly m.
std::vector<std::uint8_t> random_primitive_key(std::size_t m, Rng& rng);

SymbolSequence gen_iid(std::span<const double> probs, std::size_t n, std::uint64_t seed);

SymbolSequence gen_markov_chain(const MarkovChainParams& params, std::size_t n,
                                std::uint64_t seed);

/// Bytes of a file as symbols over a 256-letter alphabet.
SymbolSequence load_text(const std::filesystem::path& path);

/// Byte source cycling through `symbols` distinct random byte values, each
/// repeated `run_length` times, starting at a random phase of the cycle.
SymbolSequence gen_periodic_runs(std::size_t symbols, std::size_t run_length, std::size_t n,
                                 std::uint64_t seed);

/// Cuts the sequence into consecutive blocks of `block` symbols (the last one
/// possibly shorter) and permutes the blocks uniformly at random. Symbol
/// counts are preserved; dependencies longer than a block are destroyed.
SymbolSequence block_shuffle(const SymbolSequence& sequence, std::size_t block, std::uint64_t seed);

// -- elementary cellular automata ------------------------------------------

using RuleTable = std::array<std::uint8_t, 8>;

/// table[(l << 2) | (c << 1) | r] = bit ((l c r) as a 3-bit number) of `rule`.
RuleTable eca_rule_table(int rule);

using EcaRow = std::vector<std::uint8_t>;

/// Evolves `initial` for `steps` steps on a ring; returns steps+1 rows.
std::vector<EcaRow> eca_evolve(int rule, const EcaRow& initial, std::size_t steps);

/// A prediction instance: the initial row within `radius` of a target column
/// (size 2*radius+1, target column in the middle) and the cell at that
/// column after `steps` steps.
struct CaInstance {
  std::size_t column = 0;
  EcaRow window;
  std::uint8_t target = 0;
};

struct EcaSample {
  EcaSpec spec;
  std::vector<EcaRow> grid;  // grid[t][i]
  std::vector<CaInstance> instances;
};

/// Initial row of i.i.d. fair bits; `n_instances` distinct target columns
/// (or all columns if fewer exist), windows of radius `window_radius`.
EcaSample gen_eca(const EcaSpec& spec, std::size_t n_instances, std::size_t window_radius,
                  std::uint64_t seed);

}  // namespace caa::sources
