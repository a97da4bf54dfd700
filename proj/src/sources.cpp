#include "caa/sources.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <string>

namespace caa::sources {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_row(std::span<const double> row, const char* what) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + ": entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kStochasticTol)
    throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
}

// Inverse-CDF draw from a probability row.
std::uint8_t draw(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<std::uint8_t>(i);
  }
  // Rounding left u above the last partial sum: take the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return static_cast<std::uint8_t>(i);
  return 0;
}

}  // namespace

void HmmParams::validate() const {
  for (const auto& row : transition) check_row(row, "HMM transition");
  for (const auto& row : emission) check_row(row, "HMM emission");
}

HmmParams HmmParams::sticky_default() {
  return HmmParams{{{{0.98, 0.02}, {0.02, 0.98}}}, {{{0.85, 0.15}, {0.15, 0.85}}}};
}

void CryptoParams::validate() const {
  if (key.empty()) throw std::invalid_argument("crypto key must have length >= 1");
  for (auto b : key)
    if (b > 1) throw std::invalid_argument("crypto key must be bits");
}

std::size_t CryptoParams::body_period() const noexcept { return std::lcm<std::size_t>(2, key.size()); }

void EcaSpec::validate() const {
  if (rule < 0 || rule > 255) throw std::invalid_argument("ECA rule must be in [0,255]");
  if (width < 2 * steps + 1) throw std::invalid_argument("ECA width must be >= 2*steps+1");
}

void MarkovChainParams::validate() const {
  if (alphabet_size < 2 || alphabet_size > 256) throw std::invalid_argument("alphabet_size in [2,256]");
  std::size_t contexts = 1;
  for (unsigned i = 0; i < order; ++i) contexts *= alphabet_size;
  if (next.size() != contexts) throw std::invalid_argument("chain table needs alphabet^order rows");
  for (const auto& row : next) {
    if (row.size() != alphabet_size) throw std::invalid_argument("chain row has wrong width");
    check_row(row, "chain row");
  }
}

MarkovChainParams MarkovChainParams::binary_flip(double flip) {
  return MarkovChainParams{2, 1, {{1.0 - flip, flip}, {flip, 1.0 - flip}}};
}

SymbolSequence gen_periodic_noise(std::span<const std::uint8_t> tmpl, double p, std::size_t n,
                                  std::uint64_t seed, std::optional<std::size_t> phase) {
  if (tmpl.empty()) throw std::invalid_argument("template must be nonempty");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must be in [0,1]");
  if (n == 0) throw std::invalid_argument("n must be positive");
  const auto alphabet = std::max<unsigned>(2, *std::max_element(tmpl.begin(), tmpl.end()) + 1u);
  if (alphabet > 2) throw std::invalid_argument("template must be binary");

  Rng rng(seed);
  std::size_t ph = phase ? *phase % tmpl.size() : rng.below(tmpl.size());
  const std::size_t start_phase = ph;
  std::vector<std::uint8_t> out(n);
  for (auto& x : out) {
    // Draw both branches unconditionally so the random stream does not depend on p.
    const bool use_template = rng.uniform() < p;
    const std::uint8_t coin = rng.bit();
    x = use_template ? tmpl[ph] : coin;
    ph = (ph + 1) % tmpl.size();
  }
  SourceDescriptor meta{"periodic_noise",
                        {{"template", std::vector<int>(tmpl.begin(), tmpl.end())},
                         {"p", p},
                         {"n", n},
                         {"phase", start_phase}},
                        seed};
  return SymbolSequence(std::move(out), 2, std::move(meta));
}

SymbolSequence gen_hmm(const HmmParams& params, std::size_t n, std::uint64_t seed,
                       std::optional<int> initial_state) {
  params.validate();
  if (n == 0) throw std::invalid_argument("n must be positive");
  Rng rng(seed);
  const auto& T = params.transition;
  int state;
  if (initial_state) {
    state = *initial_state;
  } else {
    // Stationary distribution of a 2-state chain: pi_0 = T[1][0] / (T[0][1] + T[1][0]).
    const double denom = T[0][1] + T[1][0];
    const double pi0 = denom > 0.0 ? T[1][0] / denom : 0.5;
    state = rng.uniform() < pi0 ? 0 : 1;
  }
  std::vector<std::uint8_t> out(n);
  for (auto& x : out) {
    x = draw(params.emission[state], rng);
    state = draw(T[state], rng);
  }
  SourceDescriptor meta{"hmm",
                        {{"transition", params.transition}, {"emission", params.emission}, {"n", n}},
                        seed};
  return SymbolSequence(std::move(out), 2, std::move(meta));
}

SymbolSequence gen_xor_crypto(const CryptoParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  const std::size_t body_start = params.body_start();
  if (n < body_start + params.body_period())
    throw std::invalid_argument("n too small for prefix, key reveal and one ciphertext period");
  Rng rng(seed);
  const std::size_t m = params.key.size();
  std::vector<std::uint8_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < params.prefix_len; ++i) out.push_back(rng.bit());
  if (params.reveal) out.insert(out.end(), params.key.begin(), params.key.end());
  for (std::size_t t = 0; out.size() < n; ++t)
    out.push_back(static_cast<std::uint8_t>((t & 1U) ^ params.key[t % m]));
  SourceDescriptor meta{"xor_crypto",
                        {{"key", std::vector<int>(params.key.begin(), params.key.end())},
                         {"prefix_len", params.prefix_len},
                         {"reveal", params.reveal},
                         {"n", n}},
                        seed,
                        body_start};
  return SymbolSequence(std::move(out), 2, std::move(meta));
}

std::vector<std::uint8_t> random_primitive_key(std::size_t m, Rng& rng) {
  if (m == 0) throw std::invalid_argument("key length must be >= 1");
  std::vector<std::uint8_t> key(m);
  auto has_proper_period = [&key, m] {
    for (std::size_t d = 1; d < m; ++d) {
      if (m % d != 0) continue;
      bool periodic = true;
      for (std::size_t i = d; i < m && periodic; ++i) periodic = key[i] == key[i - d];
      if (periodic) return true;
    }
    return false;
  };
  do {
    for (auto& b : key) b = rng.bit();
  } while (has_proper_period());
  return key;
}

SymbolSequence gen_iid(std::span<const double> probs, std::size_t n, std::uint64_t seed) {
  if (probs.size() < 2 || probs.size() > 256) throw std::invalid_argument("need 2..256 probabilities");
  check_row(probs, "iid probabilities");
  if (n == 0) throw std::invalid_argument("n must be positive");
  Rng rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& x : out) x = draw(probs, rng);
  SourceDescriptor meta{"iid", {{"probs", std::vector<double>(probs.begin(), probs.end())}, {"n", n}},
                        seed};
  return SymbolSequence(std::move(out), static_cast<unsigned>(probs.size()), std::move(meta));
}

SymbolSequence gen_markov_chain(const MarkovChainParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  if (n == 0) throw std::invalid_argument("n must be positive");
  Rng rng(seed);
  const std::size_t contexts = params.next.size();
  std::size_t ctx = rng.below(contexts);  // uniform start; burn-in absorbs the transient
  std::vector<std::uint8_t> out(n);
  for (auto& x : out) {
    x = draw(params.next[ctx], rng);
    ctx = contexts == 1 ? 0 : (ctx * params.alphabet_size + x) % contexts;
  }
  nlohmann::json table = params.next;
  SourceDescriptor meta{"markov_chain", {{"order", params.order}, {"next", table}, {"n", n}}, seed};
  return SymbolSequence(std::move(out), params.alphabet_size, std::move(meta));
}

SymbolSequence load_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open text file " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.empty()) throw std::runtime_error("text file is empty: " + path.string());
  SourceDescriptor meta{"text", {{"path", path.string()}, {"n", bytes.size()}}, 0};
  return SymbolSequence(std::move(bytes), 256, std::move(meta));
}

SymbolSequence gen_periodic_runs(std::size_t symbols, std::size_t run_length, std::size_t n,
                                 std::uint64_t seed) {
  if (symbols < 1 || symbols > 256) throw std::invalid_argument("periodic source needs 1..256 symbols");
  if (run_length < 1) throw std::invalid_argument("run length must be >= 1");
  Rng rng(seed);
  std::vector<std::uint8_t> values(256);
  std::iota(values.begin(), values.end(), 0);
  for (std::size_t i = 0; i < symbols; ++i) std::swap(values[i], values[i + rng.below(256 - i)]);
  const std::size_t period = symbols * run_length;
  const std::size_t phase = rng.below(period);
  std::vector<std::uint8_t> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = values[((t + phase) % period) / run_length];
  SourceDescriptor meta{"periodic_runs", {{"symbols", symbols}, {"run_length", run_length}, {"n", n}}, seed};
  return SymbolSequence(std::move(out), 256, std::move(meta));
}

SymbolSequence block_shuffle(const SymbolSequence& sequence, std::size_t block, std::uint64_t seed) {
  if (block < 1) throw std::invalid_argument("block size must be >= 1");
  const auto s = sequence.symbols();
  const std::size_t n_blocks = (s.size() + block - 1) / block;
  std::vector<std::size_t> order(n_blocks);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n_blocks; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<std::uint8_t> out;
  out.reserve(s.size());
  for (std::size_t b : order) {
    const std::size_t begin = b * block;
    const std::size_t end = std::min(begin + block, s.size());
    out.insert(out.end(), s.begin() + static_cast<std::ptrdiff_t>(begin), s.begin() + static_cast<std::ptrdiff_t>(end));
  }
  SourceDescriptor meta = sequence.meta();
  meta.name += "+block_shuffle";
  meta.params["shuffle_block"] = block;
  meta.params["shuffle_seed"] = seed;
  return SymbolSequence(std::move(out), sequence.alphabet_size(), std::move(meta));
}

RuleTable eca_rule_table(int rule) {
  if (rule < 0 || rule > 255) throw std::invalid_argument("ECA rule must be in [0,255]");
  RuleTable table{};
  for (unsigned i = 0; i < 8; ++i) table[i] = static_cast<std::uint8_t>((rule >> i) & 1);
  return table;
}

std::vector<EcaRow> eca_evolve(int rule, const EcaRow& initial, std::size_t steps) {
  const auto table = eca_rule_table(rule);
  const std::size_t w = initial.size();
  if (w == 0) throw std::invalid_argument("empty ECA row");
  std::vector<EcaRow> grid;
  grid.reserve(steps + 1);
  grid.push_back(initial);
  for (std::size_t t = 0; t < steps; ++t) {
    const EcaRow& prev = grid.back();
    EcaRow next(w);
    for (std::size_t i = 0; i < w; ++i) {
      const unsigned l = prev[(i + w - 1) % w], c = prev[i], r = prev[(i + 1) % w];
      next[i] = table[(l << 2) | (c << 1) | r];
    }
    grid.push_back(std::move(next));
  }
  return grid;
}

EcaSample gen_eca(const EcaSpec& spec, std::size_t n_instances, std::size_t window_radius,
                  std::uint64_t seed) {
  spec.validate();
  if (2 * window_radius + 1 > spec.width)
    throw std::invalid_argument("window wider than the ECA row");
  Rng rng(seed);
  EcaRow initial(spec.width);
  for (auto& c : initial) c = rng.bit();

  EcaSample sample{spec, eca_evolve(spec.rule, initial, spec.steps), {}};

  // Partial Fisher-Yates: distinct target columns.
  std::vector<std::size_t> columns(spec.width);
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  const std::size_t count = std::min(n_instances, spec.width);
  for (std::size_t i = 0; i < count; ++i) std::swap(columns[i], columns[i + rng.below(spec.width - i)]);

  const std::size_t w = spec.width;
  sample.instances.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t col = columns[i];
    CaInstance inst{col, EcaRow(2 * window_radius + 1), sample.grid.back()[col]};
    for (std::size_t j = 0; j < inst.window.size(); ++j)
      inst.window[j] = initial[(col + w - window_radius + j) % w];
    sample.instances.push_back(std::move(inst));
  }
  return sample;
}

}  // namespace caa::sources
