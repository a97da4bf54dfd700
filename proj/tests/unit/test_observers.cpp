#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"

#include "caa/evaluation.hpp"
#include "caa/observers.hpp"
#include "caa/sources.hpp"

using namespace caa;
using namespace caa::observers;

namespace {

// Exact P(target = 1) by brute force: every completion of the unseen cells of
// the depth-k light cone, evolved one cell at a time.
double light_cone_oracle(int rule, const std::vector<std::uint8_t>& cone, std::size_t r) {
  const std::size_t len = cone.size(), k = len / 2;
  std::vector<std::size_t> unseen;
  for (std::size_t i = 0; i < len; ++i)
    if (i + r < k || i > k + r) unseen.push_back(i);
  std::size_t ones = 0;
  const std::size_t total = std::size_t{1} << unseen.size();
  for (std::size_t mask = 0; mask < total; ++mask) {
    auto row = cone;
    for (std::size_t u = 0; u < unseen.size(); ++u) row[unseen[u]] = (mask >> u) & 1U;
    for (std::size_t step = 0; step < k; ++step) {
      std::vector<std::uint8_t> next(row.size() - 2);
      for (std::size_t i = 0; i < next.size(); ++i)
        next[i] = (rule >> ((row[i] << 2) | (row[i + 1] << 1) | row[i + 2])) & 1;
      row = next;
    }
    ones += row[0];
  }
  return static_cast<double>(ones) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("uniform observer") {
  UniformObserver u(4);
  CHECK(u.predict().valid());
  CHECK(u.probability(3) == doctest::Approx(0.25));
  u.update(2);
  CHECK(u.probability(2) == doctest::Approx(0.25));
}

TEST_CASE("Markov observer applies additive smoothing to its counts") {
  MarkovObserver m(2, 1, 1.0);
  // Initial context is 0; no counts yet.
  CHECK(m.probability(0) == doctest::Approx(0.5));
  m.update(0);  // count(ctx 0 -> 0) = 1
  CHECK(m.probability(0) == doctest::Approx(2.0 / 3.0));
  m.update(1);  // count(ctx 0 -> 1) = 1, context becomes 1
  CHECK(m.probability(1) == doctest::Approx(0.5));
  m.update(1);  // count(ctx 1 -> 1) = 1
  CHECK(m.probability(1) == doctest::Approx(2.0 / 3.0));

  MarkovObserver half(3, 0, 0.5);
  for (std::uint8_t x : {0, 0, 2}) half.update(x);
  // (count + 0.5) / (3 + 1.5)
  CHECK(half.probability(0) == doctest::Approx(2.5 / 4.5));
  CHECK(half.probability(1) == doctest::Approx(0.5 / 4.5));
  CHECK(half.predict().valid());
}

TEST_CASE("Markov observer matches a reference count table on random data") {
  Rng rng(5);
  std::vector<std::uint8_t> xs(3000);
  for (auto& x : xs) x = static_cast<std::uint8_t>(rng.below(3));
  for (unsigned k : {0u, 1u, 2u, 3u}) {
    MarkovObserver m(3, k, 1.0);
    std::map<std::vector<std::uint8_t>, std::array<int, 3>> table;
    std::vector<std::uint8_t> ctx(k, 0);
    for (auto x : xs) {
      const auto& row = table[ctx];
      const double total = row[0] + row[1] + row[2];
      REQUIRE(m.probability(x) == doctest::Approx((row[x] + 1.0) / (total + 3.0)).epsilon(1e-12));
      table[ctx][x]++;
      m.update(x);
      if (k) {
        ctx.erase(ctx.begin());
        ctx.push_back(x);
      }
    }
  }
}

TEST_CASE("Markov observer learns a deterministic cycle") {
  const auto s = sources::gen_periodic_noise(std::vector<std::uint8_t>{0, 0, 1}, 1.0, 20000, 1);
  const auto order2 = evaluation::average_log_loss(ObserverSpec::markov(2), s, 1000);
  const auto order0 = evaluation::average_log_loss(ObserverSpec::markov(0), s, 1000);
  CHECK(order2.avg_loss < 0.01);
  CHECK(order0.avg_loss == doctest::Approx(0.9183).epsilon(0.01));
}

TEST_CASE("keysearch locks on the true key length") {
  const sources::CryptoParams p{{1, 0, 1, 1, 0}, 64, true};
  const auto s = sources::gen_xor_crypto(p, 400, 2);
  KeySearchObserver obs(8, std::make_unique<UniformObserver>(2), s.meta().body_start);
  std::size_t mistakes_after_lock = 0;
  for (std::size_t t = 0; t < s.size(); ++t) {
    if (obs.active_hypothesis()) {
      CHECK(*obs.active_hypothesis() == 5);
      if (obs.probability(s[t]) < 0.5) ++mistakes_after_lock;
    }
    obs.update(s[t]);
  }
  CHECK(mistakes_after_lock == 0);
  REQUIRE(obs.active_hypothesis().has_value());
  CHECK(obs.hypothesis_key(5) == p.key);
  CHECK(obs.hypothesis_alive(5));
  for (std::size_t l : {1u, 2u, 3u, 4u}) CHECK_FALSE(obs.hypothesis_alive(l));
  const std::size_t t = s.size() - s.meta().body_start;
  const auto next_bit = static_cast<std::uint8_t>((t & 1U) ^ p.key[t % 5]);
  CHECK(obs.predict().probs[next_bit] == doctest::Approx(1 - 1e-6));
}

TEST_CASE("keysearch below the key length never locks") {
  const sources::CryptoParams p{{1, 0, 0, 1, 1, 1, 0, 1}, 64, true};
  const auto s = sources::gen_xor_crypto(p, 2000, 3);
  auto obs = make_observer(ObserverSpec::keysearch(7, -1), s);
  const auto loss = evaluation::average_log_loss(*obs, s, 200);
  CHECK(loss.avg_loss == doctest::Approx(1.0));
  const auto full = evaluation::average_log_loss(ObserverSpec::keysearch(8, -1), s, 200);
  CHECK(full.avg_loss < 1e-5);
}

TEST_CASE("keysearch validation delay is l + lcm(2, l) body symbols") {
  // Key [0]: body 0,1,0,1,... Hypothesis 1 validates after 1 + 2 = 3 body symbols.
  const sources::CryptoParams p{{0}, 0, false};
  const auto s = sources::gen_xor_crypto(p, 10, 1);
  KeySearchObserver obs(1, std::make_unique<UniformObserver>(2), 0);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK_FALSE(obs.active_hypothesis());
    obs.update(s[t]);
  }
  CHECK(obs.active_hypothesis() == std::optional<std::size_t>(1));
}

TEST_CASE("CA observer in enumeration mode equals the brute-force light cone") {
  Rng rng(31);
  for (int rule : {30, 90, 110, 54, 184}) {
    const std::size_t k = 5;
    for (std::size_t r = 0; r <= k; ++r) {
      CaObserver obs(rule, r, k, 1);
      REQUIRE(obs.enumerates());
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::uint8_t> cone(2 * k + 1);
        for (auto& c : cone) c = rng.bit();
        REQUIRE(obs.probability_one(cone) == doctest::Approx(light_cone_oracle(rule, cone, r)).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("CA observer enumerates across multiple 64-lane words") {
  Rng rng(8);
  const std::size_t k = 7;
  CaObserver obs(110, 1, k, 2);  // 12 unseen cells -> 4096 completions
  REQUIRE(obs.unseen_cells() == 12);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::uint8_t> cone(2 * k + 1);
    for (auto& c : cone) c = rng.bit();
    CHECK(obs.probability_one(cone) == doctest::Approx(light_cone_oracle(110, cone, 1)).epsilon(1e-15));
  }
}

TEST_CASE("CA observer sampling mode stays near the exact marginal") {
  Rng rng(9);
  const std::size_t k = 8;
  CaObserver sampled(110, 1, k, 4, {12, 4096, 1e-6});  // 14 unseen cells -> sampled
  REQUIRE_FALSE(sampled.enumerates());
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::uint8_t> cone(2 * k + 1);
    for (auto& c : cone) c = rng.bit();
    const double exact = light_cone_oracle(110, cone, 1);
    CHECK(std::abs(sampled.probability_one(cone) - exact) < 5 * std::sqrt(0.25 / 4096));
  }
}

TEST_CASE("CA observer: full radius is exact, floors apply, wide windows are cropped") {
  const std::size_t k = 6;
  const auto sample = sources::gen_eca({30, 256, k}, 100, 9, 12);
  CaObserver full(30, 9, k, 1);  // radius clamped to the horizon
  CHECK(full.radius() == k);
  for (const auto& inst : sample.instances) {
    const auto d = full.predict(inst.window);
    REQUIRE(d.valid());
    REQUIRE(d.probs[inst.target] == doctest::Approx(1 - 1e-6).epsilon(1e-9));
  }
  CaObserver r0(30, 0, k, 1);
  CHECK_THROWS(r0.probability_one(std::vector<std::uint8_t>(4)));
}

TEST_CASE("observer specs") {
  CHECK(ObserverSpec::markov(3).label() == "markov3");
  CHECK_THROWS(ObserverSpec{ObserverKind::markov, -1}.validate());
  CHECK_THROWS(ObserverSpec{ObserverKind::markov, 1, 0.0}.validate());
  const auto ks = ObserverSpec::keysearch(8, 2, 0.5);
  nlohmann::json j = ks;
  CHECK(j.get<ObserverSpec>() == ks);
  CHECK_THROWS(make_observer(ObserverSpec{ObserverKind::ca_sim, 3}, 2));
  CHECK_THROWS(make_observer(ObserverSpec::keysearch(4), 3));
}

TEST_CASE("order-1 model on strict alternation") {
  std::vector<std::uint8_t> alt(10000);
  for (std::size_t t = 0; t < alt.size(); ++t) alt[t] = static_cast<std::uint8_t>(t & 1U);
  const SymbolSequence s(alt, 2);
  CHECK(evaluation::average_log_loss(ObserverSpec::markov(1), s, 0).avg_loss <= 0.02);
}

TEST_CASE("keysearch with enough budget decrypts every step after two body periods") {
  Rng rng(40);
  for (std::size_t m : {1u, 3u, 8u, 13u}) {
    const sources::CryptoParams p{sources::random_primitive_key(m, rng), 64, true};
    const auto s = sources::gen_xor_crypto(p, 2000, m);
    auto obs = make_observer(ObserverSpec::keysearch(static_cast<int>(m) + 2), s);
    const std::size_t settled = s.meta().body_start + 2 * std::lcm<std::size_t>(2, m);
    double worst = 0.0;
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (t >= settled) worst = std::max(worst, -std::log2(obs->probability(s[t])));
      obs->update(s[t]);
    }
    CHECK(worst <= 0.01);
  }
}

TEST_CASE("keysearch below a long random key behaves as its Markov fallback") {
  Rng rng(41);
  for (int rep = 0; rep < 4; ++rep) {
    std::vector<std::uint8_t> key(32);
    for (auto& b : key) b = rng.bit();
    const auto s = sources::gen_xor_crypto({key, 64, true}, 20000, 100 + static_cast<std::uint64_t>(rep));
    const std::size_t burn = s.meta().body_start;
    const double search = evaluation::average_log_loss(ObserverSpec::keysearch(16, 3), s, burn).avg_loss;
    const double markov = evaluation::average_log_loss(ObserverSpec::markov(3), s, burn).avg_loss;
    CHECK(std::abs(search - markov) <= 0.01);
  }
}

TEST_CASE("rule 90 below full radius predicts a fair coin") {
  // The target is the XOR of the even offsets, including the unseen cells at +-k.
  Rng rng(42);
  const std::size_t k = 6;
  for (std::size_t r = 0; r < k; ++r) {
    CaObserver obs(90, r, k, 3);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<std::uint8_t> cone(2 * k + 1);
      for (auto& c : cone) c = rng.bit();
      CHECK(std::abs(obs.probability_one(cone) - 0.5) <= 0.02);
    }
  }
}
