#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"

#include "caa/coders.hpp"
#include "caa/sources.hpp"

using namespace caa;
using namespace caa::coders;

namespace {

const Coder kAll[] = {Coder::huffman0, Coder::lz_deflate, Coder::blocksort, Coder::rle};

// Naive BWT: sort every rotation of block + sentinel explicitly.
BwtResult naive_bwt(const std::vector<std::uint8_t>& block) {
  std::vector<int> s(block.begin(), block.end());
  s.push_back(-1);
  const std::size_t n = s.size();
  std::vector<std::size_t> rot(n);
  std::iota(rot.begin(), rot.end(), 0);
  std::sort(rot.begin(), rot.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < n; ++i) {
      const int x = s[(a + i) % n], y = s[(b + i) % n];
      if (x != y) return x < y;
    }
    return false;
  });
  BwtResult out;
  for (std::size_t row = 0; row < n; ++row) {
    const int c = s[(rot[row] + n - 1) % n];
    if (c < 0)
      out.marker_row = row;
    else
      out.last_column.push_back(static_cast<std::uint8_t>(c));
  }
  return out;
}

SymbolSequence random_sequence(Rng& rng) {
  const unsigned alphabet = 2 + static_cast<unsigned>(rng.below(255));
  const std::size_t n = 1 + rng.below(rng.bernoulli(0.1) ? 20000 : 600);
  std::vector<std::uint8_t> s(n);
  switch (rng.below(4)) {
    case 0:  // uniform symbols
      for (auto& x : s) x = static_cast<std::uint8_t>(rng.below(alphabet));
      break;
    case 1: {  // long runs
      std::uint8_t cur = 0;
      for (auto& x : s) {
        if (rng.bernoulli(0.05)) cur = static_cast<std::uint8_t>(rng.below(alphabet));
        x = cur;
      }
      break;
    }
    case 2: {  // short repeating pattern
      const std::size_t period = 1 + rng.below(9);
      std::vector<std::uint8_t> pat(period);
      for (auto& p : pat) p = static_cast<std::uint8_t>(rng.below(alphabet));
      for (std::size_t i = 0; i < n; ++i) s[i] = pat[i % period];
      break;
    }
    default:  // skewed
      for (auto& x : s) x = static_cast<std::uint8_t>(rng.bernoulli(0.9) ? 0 : rng.below(alphabet));
  }
  return SymbolSequence(std::move(s), alphabet);
}

}  // namespace

TEST_CASE("coder names and ids") {
  for (auto c : kAll) {
    CHECK(coder_from_string(to_string(c)) == c);
    CHECK(coder_from_id(coder_id(c)) == c);
  }
  CHECK_THROWS(coder_from_string("zip"));
  CHECK_THROWS(coder_from_id(17));
}

TEST_CASE("BWT of banana") {
  const std::string banana = "banana";
  const std::vector<std::uint8_t> block(banana.begin(), banana.end());
  const auto bwt = bwt_forward(block);
  const auto ref = naive_bwt(block);
  CHECK(std::string(bwt.last_column.begin(), bwt.last_column.end()) == "annbaa");
  CHECK(bwt.marker_row == ref.marker_row);
  CHECK(bwt.last_column == ref.last_column);
  CHECK(bwt_inverse(bwt) == block);
}

TEST_CASE("BWT agrees with the naive rotation sort") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    const auto alphabet = 1 + rng.below(4);
    std::vector<std::uint8_t> block(n);
    for (auto& b : block) b = static_cast<std::uint8_t>(rng.below(alphabet));
    const auto fast = bwt_forward(block), ref = naive_bwt(block);
    REQUIRE(fast.last_column == ref.last_column);
    REQUIRE(fast.marker_row == ref.marker_row);
    REQUIRE(bwt_inverse(fast) == block);
  }
}

TEST_CASE("Huffman lengths satisfy Kraft, the length cap and optimality on a textbook case") {
  const std::vector<std::uint64_t> freqs{45, 13, 12, 16, 9, 5};
  const auto lens = huffman_code_lengths(freqs, 15);
  CHECK(lens == std::vector<std::uint8_t>{1, 3, 3, 3, 4, 4});

  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint64_t> f(2 + rng.below(250));
    for (auto& x : f) x = rng.bernoulli(0.2) ? 0 : (rng.next() >> (rng.below(60) + 4));  // heavy skew
    const auto l = huffman_code_lengths(f, 17);
    double kraft = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      REQUIRE((f[i] == 0) == (l[i] == 0));
      REQUIRE(l[i] <= 17);
      if (l[i]) kraft += std::ldexp(1.0, -l[i]);
    }
    if (std::count_if(f.begin(), f.end(), [](auto x) { return x > 0; }) > 1) REQUIRE(kraft <= 1.0 + 1e-12);
  }
  const std::vector<std::uint64_t> lone{0, 7, 0};
  CHECK(huffman_code_lengths(lone, 17) == std::vector<std::uint8_t>{0, 1, 0});
}

TEST_CASE("every coder round-trips 1000 random sequences") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto seq = random_sequence(rng);
    for (auto c : kAll) {
      const auto enc = compress(c, seq);
      REQUIRE(enc.bits <= enc.bytes.size() * 8);
      REQUIRE(enc.bits + 8 > enc.bytes.size() * 8);
      const auto dec = decompress(c, enc, seq.alphabet_size());
      REQUIRE(std::equal(dec.begin(), dec.end(), seq.symbols().begin(), seq.symbols().end()));
    }
  }
}

TEST_CASE("codelength reflects structure") {
  const auto periodic = sources::gen_periodic_runs(8, 32, 20000, 1);
  const std::vector<double> uniform(256, 1.0 / 256);
  const auto noise = sources::gen_iid(uniform, 20000, 2);
  CHECK(codelength(Coder::huffman0, periodic).bits_per_symbol == doctest::Approx(3.0).epsilon(0.01));
  CHECK(codelength(Coder::lz_deflate, periodic).bits_per_symbol < 0.1);
  CHECK(codelength(Coder::blocksort, periodic).bits_per_symbol < 0.1);
  CHECK(codelength(Coder::rle, periodic).bits_per_symbol == doctest::Approx(0.5).epsilon(0.02));
  for (auto c : {Coder::huffman0, Coder::lz_deflate, Coder::blocksort}) {
    const double bps = codelength(c, noise).bits_per_symbol;
    CHECK(bps > 7.9);
    CHECK(bps < 8.2);
  }
  CHECK(codelength(Coder::rle, noise).bits_per_symbol == doctest::Approx(16.0).epsilon(0.01));
}

TEST_CASE("rle encodes runs as (symbol, length - 1) pairs") {
  std::vector<std::uint8_t> s(300, 7);
  s.push_back(1);
  const auto enc = compress(Coder::rle, SymbolSequence(s, 256));
  CHECK(enc.bytes == std::vector<std::uint8_t>{7, 255, 7, 43, 1, 0});
  CHECK(enc.bits == 48);
}

TEST_CASE("codelength is deterministic") {
  Rng rng(6);
  const auto seq = random_sequence(rng);
  for (auto c : kAll) CHECK(compress(c, seq).bytes == compress(c, seq).bytes);
}

TEST_CASE("corrupt streams are rejected or decode to something else") {
  const auto seq = SymbolSequence(std::vector<std::uint8_t>{1, 2, 3, 1, 2, 3, 0}, 4);
  for (auto c : {Coder::huffman0, Coder::blocksort, Coder::lz_deflate}) {
    auto enc = compress(c, seq);
    enc.bytes.resize(enc.bytes.size() / 2);
    enc.bits = enc.bytes.size() * 8;
    bool rejected = false;
    try {
      const auto dec = decompress(c, enc, 4);
      rejected = !std::equal(dec.begin(), dec.end(), seq.symbols().begin(), seq.symbols().end());
    } catch (const std::exception&) {
      rejected = true;
    }
    CHECK(rejected);
  }
}

TEST_CASE("deflate collapses a long periodic string") {
  std::vector<std::uint8_t> s(100000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<std::uint8_t>("periodic"[i % 8]);
  CHECK(codelength(Coder::lz_deflate, SymbolSequence(s, 256)).bits_per_symbol <= 0.05);
}
