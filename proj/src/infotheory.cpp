#include "caa/infotheory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "caa/format.hpp"

namespace caa::infotheory {

namespace {

constexpr std::size_t kMaxContexts = std::size_t{1} << 26;
constexpr std::size_t kDenseEntries = std::size_t{1} << 22;

std::size_t context_count(unsigned alphabet, unsigned m) {
  std::size_t c = 1;
  for (unsigned i = 0; i < m; ++i) {
    c *= alphabet;
    if (c > kMaxContexts) throw std::invalid_argument("alphabet^order exceeds 2^26 contexts");
  }
  return c;
}

// c * log2(total / c) summed over the nonzero counts of one context.
double context_term(std::uint64_t total, const std::uint32_t* counts, std::size_t width) {
  double acc = 0.0;
  for (std::size_t x = 0; x < width; ++x)
    if (counts[x]) acc += counts[x] * std::log2(static_cast<double>(total) / counts[x]);
  return acc;
}

}  // namespace

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

EntropyEstimate empirical_conditional_entropy(const SymbolSequence& sequence, unsigned m,
                                              std::optional<std::size_t> start) {
  const unsigned a = sequence.alphabet_size();
  const std::size_t contexts = context_count(a, m);
  const std::size_t first = start.value_or(m);
  if (first < m) throw std::invalid_argument("start must leave a full context");
  const auto s = sequence.symbols();
  if (first >= s.size()) throw std::invalid_argument("no positions to score at this order");

  EntropyEstimate est;
  est.order = m;
  est.n_samples = s.size() - first;

  // Context of position t: x_{t-1} least significant, x_{t-m} most.
  std::size_t ctx = 0;
  for (std::size_t t = first - m; t < first; ++t) ctx = m ? (ctx * a + s[t]) % contexts : 0;

  double acc = 0.0;
  if (contexts * a <= kDenseEntries) {
    std::vector<std::uint32_t> counts(contexts * a, 0);
    for (std::size_t t = first; t < s.size(); ++t) {
      ++counts[ctx * a + s[t]];
      if (m) ctx = (ctx * a + s[t]) % contexts;
    }
    for (std::size_t c = 0; c < contexts; ++c) {
      std::uint64_t total = 0;
      for (unsigned x = 0; x < a; ++x) total += counts[c * a + x];
      if (total == 0) continue;
      ++est.n_contexts;
      acc += context_term(total, &counts[c * a], a);
    }
  } else {
    // Sparse: sort (context, symbol) keys and count runs.
    std::vector<std::uint64_t> keys;
    keys.reserve(est.n_samples);
    for (std::size_t t = first; t < s.size(); ++t) {
      keys.push_back(static_cast<std::uint64_t>(ctx) * a + s[t]);
      ctx = (ctx * a + s[t]) % contexts;
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::uint32_t> row(a, 0);
    for (std::size_t i = 0; i < keys.size();) {
      const std::uint64_t c = keys[i] / a;
      std::fill(row.begin(), row.end(), 0);
      std::uint64_t total = 0;
      for (; i < keys.size() && keys[i] / a == c; ++i) {
        ++row[keys[i] % a];
        ++total;
      }
      ++est.n_contexts;
      acc += context_term(total, row.data(), a);
    }
  }
  est.value = acc / static_cast<double>(est.n_samples);
  est.undersampled = est.n_samples < 10 * contexts;
  est.no_repeated_context = m > 0 && est.n_contexts == est.n_samples;
  return est;
}

double cmi_atom(const SymbolSequence& sequence, unsigned m, std::optional<std::size_t> start) {
  if (m == 0) throw std::invalid_argument("CMI atoms start at m = 1");
  const std::size_t from = start.value_or(m);
  return empirical_conditional_entropy(sequence, m - 1, from).value -
         empirical_conditional_entropy(sequence, m, from).value;
}

CmiAtomSeries excess_entropy_truncated(const SymbolSequence& sequence, unsigned max_order) {
  if (max_order == 0) throw std::invalid_argument("max_order must be >= 1");
  CmiAtomSeries out;
  for (unsigned m = 0; m <= max_order; ++m)
    out.conditional_entropies.push_back(empirical_conditional_entropy(sequence, m, max_order).value);
  double partial = 0.0;
  for (unsigned m = 1; m <= max_order; ++m) {
    const double raw = out.conditional_entropies[m - 1] - out.conditional_entropies[m];
    out.atoms_raw.push_back(raw);
    out.atoms.push_back(std::max(raw, 0.0));
    partial += out.atoms.back();
    out.partial_sums.push_back(partial);
  }
  out.truncated_excess_entropy = out.conditional_entropies.front() - out.conditional_entropies.back();
  return out;
}

std::string atoms_csv(const CmiAtomSeries& series) {
  std::ostringstream out;
  out << "m,atom_raw,atom_clamped,partial_sum\n";
  for (std::size_t i = 0; i < series.atoms.size(); ++i)
    out << i + 1 << ',' << format::num(series.atoms_raw[i]) << ',' << format::num(series.atoms[i]) << ','
        << format::num(series.partial_sums[i]) << '\n';
  return out.str();
}

// -- oracles ------------------------------------------------------------------

std::vector<double> stationary_distribution(const Matrix& transition) {
  const std::size_t n = transition.size();
  if (n == 0) throw std::invalid_argument("empty transition matrix");
  for (const auto& row : transition) {
    if (row.size() != n) throw std::invalid_argument("transition matrix must be square");
    double sum = 0.0;
    for (double v : row) {
      if (v < 0.0) throw std::invalid_argument("negative transition probability");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("transition rows must sum to 1");
  }
  // Irreducible iff every state reaches every other.
  for (std::size_t src = 0; src < n; ++src) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{src};
    seen[src] = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j)
        if (transition[i][j] > 0.0 && !seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
    }
    if (std::count(seen.begin(), seen.end(), 1) != static_cast<std::ptrdiff_t>(n))
      throw std::invalid_argument("transition matrix is not irreducible (non-ergodic chain)");
  }
  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        transition[j][i] - (i == j ? 1.0 : 0.0);
  a.row(static_cast<Eigen::Index>(n - 1)).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  b(static_cast<Eigen::Index>(n - 1)) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(b);
  return {pi.data(), pi.data() + pi.size()};
}

double markov_entropy_rate(const Matrix& transition) {
  const auto pi = stationary_distribution(transition);
  double rate = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    double h = 0.0;
    for (double p : transition[i])
      if (p > 0.0) h -= p * std::log2(p);
    rate += pi[i] * h;
  }
  return rate;
}

double hmm_conditional_entropy(const sources::HmmParams& params, unsigned m) {
  params.validate();
  if (m > 24) throw std::invalid_argument("HMM context order too large to enumerate");
  const auto& T = params.transition;
  const auto& E = params.emission;
  const auto pi = stationary_distribution({{T[0][0], T[0][1]}, {T[1][0], T[1][1]}});

  double h = 0.0;
  const std::uint64_t contexts = std::uint64_t{1} << m;
  for (std::uint64_t c = 0; c < contexts; ++c) {
    // fwd[s] = P(context, S_last = s); bits of c read oldest first.
    std::array<double, 2> prior{pi[0], pi[1]};
    std::array<double, 2> fwd{};
    for (unsigned i = 0; i < m; ++i) {
      const unsigned x = (c >> (m - 1 - i)) & 1U;
      if (i > 0) prior = {fwd[0] * T[0][0] + fwd[1] * T[1][0], fwd[0] * T[0][1] + fwd[1] * T[1][1]};
      fwd = {prior[0] * E[0][x], prior[1] * E[1][x]};
    }
    if (m > 0) prior = {fwd[0] * T[0][0] + fwd[1] * T[1][0], fwd[0] * T[0][1] + fwd[1] * T[1][1]};
    std::array<double, 2> joint{prior[0] * E[0][0] + prior[1] * E[1][0], prior[0] * E[0][1] + prior[1] * E[1][1]};
    const double pc = joint[0] + joint[1];
    for (double j : joint)
      if (j > 0.0) h -= j * std::log2(j / pc);
  }
  return h;
}

double hmm_pair_conditional_entropy(const sources::HmmParams& params) { return hmm_conditional_entropy(params, 1); }

ChainEntropies markov_chain_entropies(const sources::MarkovChainParams& params) {
  params.validate();
  const unsigned a = params.alphabet_size;
  const std::size_t contexts = params.next.size();
  auto row_entropy = [](const std::vector<double>& row) {
    double h = 0.0;
    for (double p : row)
      if (p > 0.0) h -= p * std::log2(p);
    return h;
  };
  std::vector<double> pi{1.0};
  if (params.order > 0) {
    Matrix lift(contexts, std::vector<double>(contexts, 0.0));
    for (std::size_t c = 0; c < contexts; ++c)
      for (unsigned x = 0; x < a; ++x) lift[c][(c * a + x) % contexts] += params.next[c][x];
    pi = stationary_distribution(lift);
  }
  ChainEntropies out;
  std::vector<double> marginal(a, 0.0);
  for (std::size_t c = 0; c < contexts; ++c) {
    out.rate += pi[c] * row_entropy(params.next[c]);
    for (unsigned x = 0; x < a; ++x) marginal[x] += pi[c] * params.next[c][x];
  }
  out.marginal = row_entropy(marginal);
  return out;
}

}  // namespace caa::infotheory
