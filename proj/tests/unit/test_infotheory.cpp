#include <cmath>
#include <map>

#include "doctest.h"

#include "caa/infotheory.hpp"
#include "caa/sources.hpp"

using namespace caa;
using namespace caa::infotheory;

namespace {

// Plug-in conditional entropy from a map of (context string, next symbol) counts.
double reference_conditional_entropy(const SymbolSequence& s, unsigned m, std::size_t start) {
  std::map<std::vector<std::uint8_t>, std::map<int, double>> counts;
  for (std::size_t t = start; t < s.size(); ++t) {
    std::vector<std::uint8_t> ctx(s.symbols().begin() + static_cast<std::ptrdiff_t>(t - m),
                                  s.symbols().begin() + static_cast<std::ptrdiff_t>(t));
    counts[ctx][s[t]] += 1;
  }
  const double n = static_cast<double>(s.size() - start);
  double h = 0.0;
  for (const auto& [ctx, row] : counts) {
    double tot = 0;
    for (const auto& [x, c] : row) tot += c;
    for (const auto& [x, c] : row) h -= c / n * std::log2(c / tot);
  }
  return h;
}

// Exact H(X_t | previous m outputs) of a two-state HMM by summing over every
// hidden path of length m+1 (independent of the forward recursion).
double hmm_path_oracle(const sources::HmmParams& p, unsigned m) {
  const auto& T = p.transition;
  const auto& E = p.emission;
  const double pi0 = T[1][0] / (T[0][1] + T[1][0]);
  std::map<std::uint64_t, double> joint;  // (outputs of length m+1) -> probability
  const unsigned len = m + 1;
  for (std::uint64_t hidden = 0; hidden < (1ULL << len); ++hidden)
    for (std::uint64_t out = 0; out < (1ULL << len); ++out) {
      double pr = 1.0;
      int prev = -1;
      for (unsigned i = 0; i < len; ++i) {
        const int s = (hidden >> i) & 1, x = (out >> i) & 1;
        pr *= prev < 0 ? (s == 0 ? pi0 : 1 - pi0) : T[prev][s];
        pr *= E[s][x];
        prev = s;
      }
      joint[out] += pr;
    }
  double h = 0.0;
  const std::uint64_t mask = (1ULL << m) - 1;
  for (std::uint64_t ctx = 0; ctx <= mask; ++ctx) {
    const double a = joint[ctx], b = joint[ctx | (1ULL << m)];
    for (double v : {a, b})
      if (v > 0) h -= v * std::log2(v / (a + b));
  }
  return h;
}

}  // namespace

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.1) == doctest::Approx(0.4689955935892812));
}

TEST_CASE("plug-in conditional entropy equals a map-based reference") {
  Rng rng(1);
  const auto s = sources::gen_markov_chain(sources::MarkovChainParams::binary_flip(0.3), 5000, 2);
  std::vector<std::uint8_t> tern(4000);
  for (auto& x : tern) x = static_cast<std::uint8_t>(rng.below(3));
  const SymbolSequence t(tern, 3);
  for (unsigned m = 0; m <= 6; ++m) {
    CHECK(empirical_conditional_entropy(s, m).value == doctest::Approx(reference_conditional_entropy(s, m, m)).epsilon(1e-12));
    CHECK(empirical_conditional_entropy(t, m, 6).value == doctest::Approx(reference_conditional_entropy(t, m, 6)).epsilon(1e-12));
  }
  // Byte alphabet at order 3 exceeds the dense table and takes the sorted path.
  std::vector<std::uint8_t> bytes(3000);
  for (auto& x : bytes) x = static_cast<std::uint8_t>(rng.below(256));
  const SymbolSequence b(bytes, 256);
  const auto est = empirical_conditional_entropy(b, 3);
  CHECK(est.value == doctest::Approx(reference_conditional_entropy(b, 3, 3)).epsilon(1e-12));
  CHECK(est.undersampled);
  CHECK(est.no_repeated_context);
  CHECK_THROWS(empirical_conditional_entropy(b, 4));  // 256^4 contexts
  CHECK_THROWS(empirical_conditional_entropy(s, 3, 2));
}

TEST_CASE("CMI atoms telescope exactly") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::uint8_t> xs(20000);
    for (auto& x : xs) x = static_cast<std::uint8_t>(rng.bernoulli(0.3));
    const SymbolSequence s(xs, 2);
    for (unsigned M = 1; M <= 6; ++M) {
      const auto series = excess_entropy_truncated(s, M);
      double sum = 0.0;
      for (double a : series.atoms_raw) sum += a;
      REQUIRE(std::abs(sum - series.truncated_excess_entropy) <= 1e-12);
      REQUIRE(std::abs(series.truncated_excess_entropy -
                       (empirical_conditional_entropy(s, 0, M).value - empirical_conditional_entropy(s, M, M).value)) <=
              1e-12);
      for (double a : series.atoms_raw) REQUIRE(a >= -1e-12);
    }
  }
}

TEST_CASE("order-K chains: atoms vanish beyond K") {
  const auto flip = sources::MarkovChainParams::binary_flip(0.1);
  const auto s = sources::gen_markov_chain(flip, 100000, 7);
  const auto series = excess_entropy_truncated(s, 6);
  CHECK(std::abs(series.truncated_excess_entropy - (1.0 - binary_entropy(0.1))) <= 0.01);
  for (std::size_t m = 1; m < series.atoms.size(); ++m) CHECK(series.atoms[m] <= 0.01);
  CHECK(cmi_atom(s, 1) == doctest::Approx(1.0 - binary_entropy(0.1)).epsilon(0.02));

  sources::MarkovChainParams order2{2, 2, {{0.8, 0.2}, {0.3, 0.7}, {0.1, 0.9}, {0.75, 0.25}}};
  const auto s2 = sources::gen_markov_chain(order2, 100000, 8);
  const auto series2 = excess_entropy_truncated(s2, 6);
  CHECK(series2.atoms[1] > 0.05);
  for (std::size_t m = 2; m < series2.atoms.size(); ++m) CHECK(series2.atoms[m] <= 0.01);
  CHECK(std::abs(series2.truncated_excess_entropy - markov_chain_entropies(order2).excess()) <= 0.01);
}

TEST_CASE("atoms CSV layout") {
  const SymbolSequence s({0, 1, 0, 1, 0, 1, 0, 1}, 2);
  const auto csv = atoms_csv(excess_entropy_truncated(s, 2));
  CHECK(csv.rfind("m,atom_raw,atom_clamped,partial_sum\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find("\n1,1,1,1\n") != std::string::npos);
}

TEST_CASE("stationary distribution and entropy rate") {
  const double a = 0.3, b = 0.1;
  const auto pi = stationary_distribution({{1 - a, a}, {b, 1 - b}});
  CHECK(pi[0] == doctest::Approx(b / (a + b)));
  CHECK(pi[1] == doctest::Approx(a / (a + b)));
  CHECK(markov_entropy_rate({{1 - a, a}, {b, 1 - b}}) ==
        doctest::Approx(b / (a + b) * binary_entropy(a) + a / (a + b) * binary_entropy(b)));
  const auto uniform3 = stationary_distribution({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  for (double p : uniform3) CHECK(p == doctest::Approx(1.0 / 3));
  CHECK_THROWS(stationary_distribution({{1, 0}, {0, 1}}));
  CHECK_THROWS(stationary_distribution({{1, 0}, {0.5, 0.5}}));
  CHECK_THROWS(stationary_distribution({{0.5, 0.6}, {0.5, 0.5}}));
}

TEST_CASE("chain entropies via the order-K lift") {
  const auto flip = markov_chain_entropies(sources::MarkovChainParams::binary_flip(0.1));
  CHECK(flip.marginal == doctest::Approx(1.0));
  CHECK(flip.rate == doctest::Approx(binary_entropy(0.1)));
  CHECK(flip.excess() == doctest::Approx(0.5310044064));
  const auto iid = markov_chain_entropies({2, 0, {{0.5, 0.5}}});
  CHECK(iid.excess() == doctest::Approx(0.0));
}

TEST_CASE("HMM conditional entropy: forward recursion equals path enumeration") {
  const auto params = sources::HmmParams::sticky_default();
  for (unsigned m = 0; m <= 8; ++m)
    CHECK(hmm_conditional_entropy(params, m) == doctest::Approx(hmm_path_oracle(params, m)).epsilon(1e-12));
  sources::HmmParams odd{{{{0.7, 0.3}, {0.4, 0.6}}}, {{{0.9, 0.1}, {0.2, 0.8}}}};
  for (unsigned m = 0; m <= 6; ++m)
    CHECK(hmm_conditional_entropy(odd, m) == doctest::Approx(hmm_path_oracle(odd, m)).epsilon(1e-12));
  // More context never hurts.
  for (unsigned m = 1; m <= 10; ++m) CHECK(hmm_conditional_entropy(params, m) <= hmm_conditional_entropy(params, m - 1) + 1e-15);
  // The empirical estimate converges to it.
  const auto s = sources::gen_hmm(params, 200000, 5);
  CHECK(std::abs(empirical_conditional_entropy(s, 3).value - hmm_conditional_entropy(params, 3)) <= 0.01);
}
