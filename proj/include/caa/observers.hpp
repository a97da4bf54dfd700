#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "caa/rng.hpp"
#include "caa/sequence.hpp"
#include "caa/sources.hpp"

namespace caa::observers {

/// Probability vector over the alphabet for the next symbol.
struct PredictiveDistribution {
  std::vector<double> probs;

  /// Sums to 1 within `tol` and every entry is strictly positive.
  bool valid(double tol = 1e-9) const;
};

enum class ObserverKind { uniform, markov, keysearch, ca_sim, coder };

std::string to_string(ObserverKind kind);
ObserverKind observer_kind_from_string(const std::string& name);

/// Configuration of one observer. `budget` is the Markov order, the maximum
/// key length, the CA radius or the coder id depending on `kind`.
/// `fallback_order` (keysearch only): order of the internal Markov
/// predictor used while no key hypothesis is validated; negative means the
/// uniform predictor.
struct ObserverSpec {
  ObserverKind kind = ObserverKind::markov;
  int budget = 0;
  double alpha = 1.0;
  int fallback_order = 3;

  void validate() const;
  std::string label() const;

  static ObserverSpec uniform() { return {ObserverKind::uniform, 0, 1.0, -1}; }
  static ObserverSpec markov(int order, double alpha = 1.0) { return {ObserverKind::markov, order, alpha, -1}; }
  static ObserverSpec keysearch(int max_len, int fallback_order = 3, double alpha = 1.0) {
    return {ObserverKind::keysearch, max_len, alpha, fallback_order};
  }

  friend bool operator==(const ObserverSpec&, const ObserverSpec&) = default;
};

void to_json(nlohmann::json& j, const ObserverSpec& s);
void from_json(const nlohmann::json& j, ObserverSpec& s);

/// Online sequential predictor: predict() the next symbol, then update()
/// with the realized one.
class Observer {
 public:
  virtual ~Observer() = default;

  virtual unsigned alphabet_size() const noexcept = 0;
  virtual PredictiveDistribution predict() const = 0;
  /// Probability assigned to `symbol` by the current prediction.
  virtual double probability(std::uint8_t symbol) const { return predict().probs.at(symbol); }
  virtual void update(std::uint8_t symbol) = 0;
};

/// Always predicts the uniform distribution.
class UniformObserver final : public Observer {
 public:
  explicit UniformObserver(unsigned alphabet_size);
  unsigned alphabet_size() const noexcept override { return alphabet_size_; }
  PredictiveDistribution predict() const override;
  double probability(std::uint8_t) const override { return 1.0 / alphabet_size_; }
  void update(std::uint8_t) override {}

 private:
  unsigned alphabet_size_;
};

/// Order-k context counts with additive smoothing:
///   P(x | ctx) = (count(ctx, x) + alpha) / (count(ctx) + alpha * |alphabet|).
/// The context starts as k zeros.
class MarkovObserver final : public Observer {
 public:
  MarkovObserver(unsigned alphabet_size, unsigned order, double alpha = 1.0);

  unsigned alphabet_size() const noexcept override { return alphabet_size_; }
  unsigned order() const noexcept { return order_; }
  PredictiveDistribution predict() const override;
  double probability(std::uint8_t symbol) const override;
  void update(std::uint8_t symbol) override;

 private:
  unsigned alphabet_size_;
  unsigned order_;
  double alpha_;
  std::size_t n_contexts_;
  std::size_t context_ = 0;
  std::vector<std::uint32_t> counts_;  // [context * alphabet + symbol]
  std::vector<std::uint32_t> totals_;  // [context]
};

/// Known-plaintext searcher for repeating-key XOR over the alternating
/// plaintext 0,1,0,1,... (binary alphabet).
///
/// Hypothesis l (1 <= l <= max_len) takes its key from the first l body
/// symbols, key[j] = c_j xor p_j, and dies at the first body symbol that
/// contradicts it. It counts as validated once l + lcm(2, l) body symbols
/// have been seen and it is still alive. The shortest validated hypothesis
/// predicts the next ciphertext bit with probability 1 - epsilon; with none
/// validated the observer defers to its fallback predictor, which sees every
/// symbol. Symbols before `body_start` only feed the fallback.
class KeySearchObserver final : public Observer {
 public:
  KeySearchObserver(std::size_t max_len, std::unique_ptr<Observer> fallback,
                    std::size_t body_start = 0, double epsilon = 1e-6);

  unsigned alphabet_size() const noexcept override { return 2; }
  PredictiveDistribution predict() const override;
  double probability(std::uint8_t symbol) const override;
  void update(std::uint8_t symbol) override;

  /// Length of the hypothesis currently used for prediction, if any.
  std::optional<std::size_t> active_hypothesis() const noexcept;
  /// Key of hypothesis `len` (as far as it has been observed).
  const std::vector<std::uint8_t>& hypothesis_key(std::size_t len) const { return keys_.at(len - 1); }
  bool hypothesis_alive(std::size_t len) const { return alive_.at(len - 1) != 0; }

 private:
  std::optional<std::uint8_t> locked_prediction() const noexcept;

  std::size_t max_len_;
  std::unique_ptr<Observer> fallback_;
  std::size_t body_start_;
  double epsilon_;
  std::size_t position_ = 0;  // absolute index of the next symbol
  std::vector<std::vector<std::uint8_t>> keys_;
  std::vector<char> alive_;
  std::vector<std::size_t> validate_at_;  // body symbols needed before validation
};

/// Local simulator for one elementary CA cell `horizon` steps ahead.
///
/// Given the initial row within `radius` of the target column, it fills the
/// unseen cells of the depth-`horizon` light cone with fair bits (all
/// completions when there are at most `enumerate_limit` unseen cells,
/// otherwise `samples` random ones), runs the rule forward and returns the
/// empirical distribution of the target cell floored at `epsilon`.
/// Radii above the horizon are clamped to it.
class CaObserver {
 public:
  struct Options {
    std::size_t enumerate_limit = 12;
    std::size_t samples = 512;
    double epsilon = 1e-6;
  };

  CaObserver(int rule, std::size_t radius, std::size_t horizon, std::uint64_t seed);
  CaObserver(int rule, std::size_t radius, std::size_t horizon, std::uint64_t seed, Options options);

  std::size_t radius() const noexcept { return radius_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::size_t unseen_cells() const noexcept { return 2 * (horizon_ - radius_); }
  bool enumerates() const noexcept { return unseen_cells() <= options_.enumerate_limit; }

  /// `window` is centred on the target column and has odd size
  /// >= 2 * radius() + 1; cells outside the radius are ignored.
  PredictiveDistribution predict(std::span<const std::uint8_t> window);

  /// Unfloored fraction of completions whose target cell is 1.
  double probability_one(std::span<const std::uint8_t> window);

 private:
  sources::RuleTable table_;
  std::size_t radius_;
  std::size_t horizon_;
  Options options_;
  Rng rng_;
  std::vector<std::uint64_t> cells_;
};

/// Fresh observer for `spec` on `sequence` (alphabet and body alignment are
/// taken from the sequence). ca_sim and coder specs are not sequential
/// predictors and are rejected here.
std::unique_ptr<Observer> make_observer(const ObserverSpec& spec, const SymbolSequence& sequence);
std::unique_ptr<Observer> make_observer(const ObserverSpec& spec, unsigned alphabet_size,
                                        std::size_t body_start = 0);

}  // namespace caa::observers
