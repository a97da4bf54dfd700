#include "caa/observers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "caa/coders.hpp"

namespace caa::observers {

bool PredictiveDistribution::valid(double tol) const {
  if (probs.empty()) return false;
  double sum = 0.0;
  for (double p : probs) {
    if (!(p > 0.0)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

std::string to_string(ObserverKind kind) {
  switch (kind) {
    case ObserverKind::uniform: return "uniform";
    case ObserverKind::markov: return "markov";
    case ObserverKind::keysearch: return "keysearch";
    case ObserverKind::ca_sim: return "ca_sim";
    case ObserverKind::coder: return "coder";
  }
  return "unknown";
}

ObserverKind observer_kind_from_string(const std::string& name) {
  for (auto k : {ObserverKind::uniform, ObserverKind::markov, ObserverKind::keysearch,
                 ObserverKind::ca_sim, ObserverKind::coder})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown observer kind: " + name);
}

void ObserverSpec::validate() const {
  if (budget < 0) throw std::invalid_argument("observer budget must be >= 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("smoothing alpha must be > 0");
  if (kind == ObserverKind::coder) (void)coders::coder_from_id(budget);
}

std::string ObserverSpec::label() const {
  switch (kind) {
    case ObserverKind::uniform: return "uniform";
    case ObserverKind::markov: return "markov" + std::to_string(budget);
    case ObserverKind::keysearch:
      return "keysearch" + std::to_string(budget) +
             (fallback_order < 0 ? std::string("/uniform") : "/markov" + std::to_string(fallback_order));
    case ObserverKind::ca_sim: return "ca_sim_r" + std::to_string(budget);
    case ObserverKind::coder: return coders::to_string(coders::coder_from_id(budget));
  }
  return "unknown";
}

void to_json(nlohmann::json& j, const ObserverSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"budget", s.budget}, {"alpha", s.alpha}};
  if (s.kind == ObserverKind::keysearch) j["fallback_order"] = s.fallback_order;
  if (s.kind == ObserverKind::coder) j["coder"] = coders::to_string(coders::coder_from_id(s.budget));
}

void from_json(const nlohmann::json& j, ObserverSpec& s) {
  s.kind = observer_kind_from_string(j.at("kind").get<std::string>());
  if (s.kind == ObserverKind::coder && j.contains("coder"))
    s.budget = coders::coder_id(coders::coder_from_string(j.at("coder").get<std::string>()));
  else
    s.budget = j.value("budget", 0);
  s.alpha = j.value("alpha", 1.0);
  s.fallback_order = j.value("fallback_order", s.kind == ObserverKind::keysearch ? 3 : -1);
  s.validate();
}

// -- uniform ------------------------------------------------------------------

UniformObserver::UniformObserver(unsigned alphabet_size) : alphabet_size_(alphabet_size) {
  if (alphabet_size_ < 2) throw std::invalid_argument("alphabet_size must be >= 2");
}

PredictiveDistribution UniformObserver::predict() const {
  return {std::vector<double>(alphabet_size_, 1.0 / alphabet_size_)};
}

// -- markov -------------------------------------------------------------------

MarkovObserver::MarkovObserver(unsigned alphabet_size, unsigned order, double alpha)
    : alphabet_size_(alphabet_size), order_(order), alpha_(alpha), n_contexts_(1) {
  if (alphabet_size_ < 2) throw std::invalid_argument("alphabet_size must be >= 2");
  if (!(alpha_ > 0.0)) throw std::invalid_argument("smoothing alpha must be > 0");
  constexpr std::size_t kMaxEntries = std::size_t{1} << 26;
  for (unsigned i = 0; i < order_; ++i) {
    n_contexts_ *= alphabet_size_;
    if (n_contexts_ * alphabet_size_ > kMaxEntries)
      throw std::invalid_argument("Markov order too large for alphabet (count table > 2^26)");
  }
  counts_.assign(n_contexts_ * alphabet_size_, 0);
  totals_.assign(n_contexts_, 0);
}

PredictiveDistribution MarkovObserver::predict() const {
  PredictiveDistribution d{std::vector<double>(alphabet_size_)};
  const double denom = totals_[context_] + alpha_ * alphabet_size_;
  const std::uint32_t* row = counts_.data() + context_ * alphabet_size_;
  for (unsigned x = 0; x < alphabet_size_; ++x) d.probs[x] = (row[x] + alpha_) / denom;
  return d;
}

double MarkovObserver::probability(std::uint8_t symbol) const {
  return (counts_[context_ * alphabet_size_ + symbol] + alpha_) /
         (totals_[context_] + alpha_ * alphabet_size_);
}

void MarkovObserver::update(std::uint8_t symbol) {
  ++counts_[context_ * alphabet_size_ + symbol];
  ++totals_[context_];
  if (order_ > 0) context_ = (context_ * alphabet_size_ + symbol) % n_contexts_;
}

// -- keysearch ----------------------------------------------------------------

KeySearchObserver::KeySearchObserver(std::size_t max_len, std::unique_ptr<Observer> fallback,
                                     std::size_t body_start, double epsilon)
    : max_len_(max_len),
      fallback_(std::move(fallback)),
      body_start_(body_start),
      epsilon_(epsilon),
      keys_(max_len),
      alive_(max_len, 1),
      validate_at_(max_len) {
  if (!fallback_) throw std::invalid_argument("keysearch needs a fallback observer");
  if (fallback_->alphabet_size() != 2) throw std::invalid_argument("keysearch is binary only");
  if (!(epsilon_ > 0.0 && epsilon_ < 0.5)) throw std::invalid_argument("epsilon must be in (0, 0.5)");
  for (std::size_t l = 1; l <= max_len_; ++l) {
    keys_[l - 1].reserve(l);
    validate_at_[l - 1] = l + std::lcm<std::size_t>(2, l);
  }
}

std::optional<std::size_t> KeySearchObserver::active_hypothesis() const noexcept {
  if (position_ < body_start_) return std::nullopt;
  const std::size_t t = position_ - body_start_;
  for (std::size_t l = 1; l <= max_len_; ++l)
    if (alive_[l - 1] && t >= validate_at_[l - 1]) return l;
  return std::nullopt;
}

std::optional<std::uint8_t> KeySearchObserver::locked_prediction() const noexcept {
  const auto l = active_hypothesis();
  if (!l) return std::nullopt;
  const std::size_t t = position_ - body_start_;
  return static_cast<std::uint8_t>((t & 1U) ^ keys_[*l - 1][t % *l]);
}

PredictiveDistribution KeySearchObserver::predict() const {
  if (const auto bit = locked_prediction()) {
    PredictiveDistribution d{{epsilon_, epsilon_}};
    d.probs[*bit] = 1.0 - epsilon_;
    return d;
  }
  return fallback_->predict();
}

double KeySearchObserver::probability(std::uint8_t symbol) const {
  if (const auto bit = locked_prediction()) return symbol == *bit ? 1.0 - epsilon_ : epsilon_;
  return fallback_->probability(symbol);
}

void KeySearchObserver::update(std::uint8_t symbol) {
  fallback_->update(symbol);
  if (position_ >= body_start_) {
    const std::size_t t = position_ - body_start_;
    const auto z = static_cast<std::uint8_t>(symbol ^ (t & 1U));
    for (std::size_t l = 1; l <= max_len_; ++l) {
      if (!alive_[l - 1]) continue;
      auto& key = keys_[l - 1];
      if (t < l)
        key.push_back(z);
      else if (key[t % l] != z)
        alive_[l - 1] = 0;
    }
  }
  ++position_;
}

// -- cellular automaton simulator ----------------------------------------------

namespace {

// Lane patterns for the low six bits of a completion index.
constexpr std::uint64_t kLanePattern[6] = {
    0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
    0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};

std::uint64_t apply_rule(const sources::RuleTable& table, std::uint64_t l, std::uint64_t c,
                         std::uint64_t r) noexcept {
  std::uint64_t out = 0;
  for (unsigned idx = 0; idx < 8; ++idx) {
    if (!table[idx]) continue;
    out |= ((idx & 4) ? l : ~l) & ((idx & 2) ? c : ~c) & ((idx & 1) ? r : ~r);
  }
  return out;
}

}  // namespace

CaObserver::CaObserver(int rule, std::size_t radius, std::size_t horizon, std::uint64_t seed)
    : CaObserver(rule, radius, horizon, seed, Options{}) {}

CaObserver::CaObserver(int rule, std::size_t radius, std::size_t horizon, std::uint64_t seed,
                       Options options)
    : table_(sources::eca_rule_table(rule)),
      radius_(std::min(radius, horizon)),
      horizon_(horizon),
      options_(options),
      rng_(seed),
      cells_(2 * horizon + 1) {
  if (options_.enumerate_limit > 30) throw std::invalid_argument("enumerate_limit must be <= 30");
  if (options_.samples == 0) throw std::invalid_argument("samples must be positive");
  if (!(options_.epsilon > 0.0 && options_.epsilon < 0.5))
    throw std::invalid_argument("epsilon must be in (0, 0.5)");
}

double CaObserver::probability_one(std::span<const std::uint8_t> window) {
  if (window.size() % 2 == 0 || window.size() < 2 * radius_ + 1)
    throw std::invalid_argument("CA window must be odd-sized and cover the observer radius");
  const std::size_t k = horizon_, r = radius_;
  const std::size_t centre = window.size() / 2;
  const std::size_t unseen = unseen_cells();
  const std::size_t len = 2 * k + 1;

  std::uint64_t total_lanes;
  std::size_t words;
  std::uint64_t last_mask = ~std::uint64_t{0};
  if (enumerates()) {
    total_lanes = std::uint64_t{1} << unseen;
    words = static_cast<std::size_t>((total_lanes + 63) / 64);
    if (total_lanes < 64) last_mask = (std::uint64_t{1} << total_lanes) - 1;
  } else {
    words = (options_.samples + 63) / 64;
    total_lanes = std::uint64_t{64} * words;
  }

  std::uint64_t ones = 0;
  std::vector<std::uint64_t>& cur = cells_;
  for (std::size_t w = 0; w < words; ++w) {
    // Unseen cells are numbered left to right: offsets -k..-r-1 then r+1..k.
    std::size_t u = 0;
    for (std::size_t i = 0; i < len; ++i) {
      const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(k);
      if (static_cast<std::size_t>(std::abs(off)) <= r) {
        cur[i] = window[centre + off] ? ~std::uint64_t{0} : 0;
      } else if (enumerates()) {
        cur[i] = u < 6 ? kLanePattern[u] : (((w >> (u - 6)) & 1U) ? ~std::uint64_t{0} : 0);
        ++u;
      } else {
        cur[i] = rng_.next();
        ++u;
      }
    }
    // Step s keeps cells s .. len-1-s (the shrinking light cone).
    for (std::size_t s = 1; s <= k; ++s) {
      std::uint64_t left = cur[s - 1];
      for (std::size_t i = s; i + s < len; ++i) {
        const std::uint64_t mid = cur[i];
        cur[i] = apply_rule(table_, left, mid, cur[i + 1]);
        left = mid;
      }
    }
    const std::uint64_t mask = (w + 1 == words) ? last_mask : ~std::uint64_t{0};
    ones += static_cast<std::uint64_t>(std::popcount(cur[k] & mask));
  }
  return static_cast<double>(ones) / static_cast<double>(total_lanes);
}

PredictiveDistribution CaObserver::predict(std::span<const std::uint8_t> window) {
  const double p1 = probability_one(window);
  const double eps = options_.epsilon;
  const double a = std::max(1.0 - p1, eps), b = std::max(p1, eps);
  return {{a / (a + b), b / (a + b)}};
}

// -- factory ------------------------------------------------------------------

std::unique_ptr<Observer> make_observer(const ObserverSpec& spec, unsigned alphabet_size,
                                        std::size_t body_start) {
  spec.validate();
  switch (spec.kind) {
    case ObserverKind::uniform:
      return std::make_unique<UniformObserver>(alphabet_size);
    case ObserverKind::markov:
      return std::make_unique<MarkovObserver>(alphabet_size, static_cast<unsigned>(spec.budget), spec.alpha);
    case ObserverKind::keysearch: {
      std::unique_ptr<Observer> fallback;
      if (spec.fallback_order < 0)
        fallback = std::make_unique<UniformObserver>(alphabet_size);
      else
        fallback = std::make_unique<MarkovObserver>(alphabet_size,
                                                    static_cast<unsigned>(spec.fallback_order), spec.alpha);
      return std::make_unique<KeySearchObserver>(static_cast<std::size_t>(spec.budget), std::move(fallback),
                                                 body_start);
    }
    case ObserverKind::ca_sim:
    case ObserverKind::coder:
      break;
  }
  throw std::invalid_argument("observer kind '" + to_string(spec.kind) + "' is not a sequential predictor");
}

std::unique_ptr<Observer> make_observer(const ObserverSpec& spec, const SymbolSequence& sequence) {
  return make_observer(spec, sequence.alphabet_size(), sequence.meta().body_start);
}

}  // namespace caa::observers
