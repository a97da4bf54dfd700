#include "caa/coders.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <zlib.h>

#include "bitio.hpp"

namespace caa::coders {

using detail::BitReader;
using detail::BitWriter;

std::string to_string(Coder coder) {
  switch (coder) {
    case Coder::huffman0: return "huffman0";
    case Coder::lz_deflate: return "lz_deflate";
    case Coder::blocksort: return "blocksort";
    case Coder::rle: return "rle";
  }
  return "unknown";
}

Coder coder_from_string(const std::string& name) {
  for (auto c : {Coder::huffman0, Coder::lz_deflate, Coder::blocksort, Coder::rle})
    if (to_string(c) == name) return c;
  throw std::invalid_argument("unknown coder: " + name);
}

int coder_id(Coder coder) noexcept { return static_cast<int>(coder); }

Coder coder_from_id(int id) {
  if (id < 0 || id > coder_id(Coder::rle)) throw std::invalid_argument("unknown coder id");
  return static_cast<Coder>(id);
}

// -- Huffman tables -----------------------------------------------------------

std::vector<std::uint8_t> huffman_code_lengths(std::span<const std::uint64_t> freqs, unsigned max_len) {
  std::vector<std::uint8_t> lengths(freqs.size(), 0);
  std::vector<std::uint64_t> weight(freqs.begin(), freqs.end());
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < weight.size(); ++i)
    if (weight[i] > 0) active.push_back(i);
  if (active.empty()) return lengths;
  if (active.size() == 1) {
    lengths[active[0]] = 1;
    return lengths;
  }
  if ((std::size_t{1} << max_len) < active.size())
    throw std::invalid_argument("max code length too small for alphabet");

  for (;;) {
    // Nodes 0..active-1 are leaves; ties broken by node index for determinism.
    using Item = std::pair<std::uint64_t, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::vector<std::size_t> parent;
    parent.reserve(2 * active.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      heap.emplace(weight[active[i]], i);
      parent.push_back(0);
    }
    while (heap.size() > 1) {
      const auto a = heap.top();
      heap.pop();
      const auto b = heap.top();
      heap.pop();
      const std::size_t node = parent.size();
      parent.push_back(0);
      parent[a.second] = node;
      parent[b.second] = node;
      heap.emplace(a.first + b.first, node);
    }
    const std::size_t root = parent.size() - 1;
    std::vector<unsigned> depth(parent.size(), 0);
    for (std::size_t node = root; node-- > 0;) depth[node] = depth[parent[node]] + 1;
    unsigned longest = 0;
    for (std::size_t i = 0; i < active.size(); ++i) longest = std::max(longest, depth[i]);
    if (longest <= max_len) {
      for (std::size_t i = 0; i < active.size(); ++i) lengths[active[i]] = static_cast<std::uint8_t>(depth[i]);
      return lengths;
    }
    // Flatten the distribution and retry.
    for (auto i : active) weight[i] = 1 + weight[i] / 2;
  }
}

namespace {

struct CanonicalCode {
  std::vector<std::uint32_t> codes;
  std::vector<std::uint8_t> lengths;
};

CanonicalCode canonical_code(std::vector<std::uint8_t> lengths) {
  std::vector<std::size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lengths[a] < lengths[b]; });
  CanonicalCode cc{std::vector<std::uint32_t>(lengths.size(), 0), std::move(lengths)};
  std::uint32_t code = 0;
  unsigned prev = 0;
  for (auto s : order) {
    const unsigned len = cc.lengths[s];
    if (len == 0) continue;
    if (prev != 0) ++code;
    code <<= (len - prev);
    prev = len;
    cc.codes[s] = code;
  }
  return cc;
}

class CanonicalDecoder {
 public:
  explicit CanonicalDecoder(const std::vector<std::uint8_t>& lengths) {
    unsigned max_len = 0;
    for (auto l : lengths) max_len = std::max<unsigned>(max_len, l);
    count_.assign(max_len + 1, 0);
    for (auto l : lengths)
      if (l) ++count_[l];
    for (unsigned len = 1; len <= max_len; ++len)
      for (std::size_t s = 0; s < lengths.size(); ++s)
        if (lengths[s] == len) sorted_.push_back(static_cast<std::uint32_t>(s));
    first_code_.assign(max_len + 1, 0);
    first_index_.assign(max_len + 1, 0);
    std::uint32_t code = 0, index = 0;
    for (unsigned len = 1; len <= max_len; ++len) {
      code = (code + (len > 1 ? count_[len - 1] : 0)) << 1;
      if (len == 1) code = 0;
      first_code_[len] = code;
      first_index_[len] = index;
      index += count_[len];
    }
  }

  std::uint32_t decode(BitReader& in) const {
    std::uint32_t code = 0;
    for (std::size_t len = 1; len < count_.size(); ++len) {
      code = (code << 1) | in.get_bit();
      if (code - first_code_[len] < count_[len] && code >= first_code_[len])
        return sorted_[first_index_[len] + (code - first_code_[len])];
    }
    throw std::runtime_error("invalid Huffman code in stream");
  }

 private:
  std::vector<std::uint32_t> count_;
  std::vector<std::uint32_t> sorted_;
  std::vector<std::uint32_t> first_code_;
  std::vector<std::uint32_t> first_index_;
};

// -- huffman0 -----------------------------------------------------------------
// Header: u32 length | alphabet_size presence bits | u8 code length per
// present symbol. Payload: one canonical code per symbol.

constexpr unsigned kHuffman0MaxLen = 32;

EncodedStream huffman0_encode(const SymbolSequence& seq) {
  if (seq.size() > 0xFFFFFFFFULL) throw std::invalid_argument("huffman0: sequence too long");
  std::vector<std::uint64_t> freq(seq.alphabet_size(), 0);
  for (auto s : seq.symbols()) ++freq[s];
  const auto code = canonical_code(huffman_code_lengths(freq, kHuffman0MaxLen));

  BitWriter out;
  out.put(static_cast<std::uint32_t>(seq.size()), 32);
  for (unsigned s = 0; s < seq.alphabet_size(); ++s) out.put_bit(freq[s] > 0);
  for (unsigned s = 0; s < seq.alphabet_size(); ++s)
    if (freq[s] > 0) out.put(code.lengths[s], 8);
  for (auto s : seq.symbols()) out.put(code.codes[s], code.lengths[s]);
  const auto bits = out.bits();
  return {out.take(), bits};
}

std::vector<std::uint8_t> huffman0_decode(const EncodedStream& stream, unsigned alphabet_size) {
  BitReader in(stream.bytes, stream.bits);
  const std::uint32_t n = in.get(32);
  std::vector<bool> present(alphabet_size);
  for (unsigned s = 0; s < alphabet_size; ++s) present[s] = in.get_bit() != 0;
  std::vector<std::uint8_t> lengths(alphabet_size, 0);
  for (unsigned s = 0; s < alphabet_size; ++s)
    if (present[s]) lengths[s] = static_cast<std::uint8_t>(in.get(8));
  const CanonicalDecoder decoder(lengths);
  std::vector<std::uint8_t> out(n);
  for (auto& s : out) s = static_cast<std::uint8_t>(decoder.decode(in));
  return out;
}

// -- DEFLATE ------------------------------------------------------------------

EncodedStream deflate_encode(const SymbolSequence& seq) {
  z_stream zs{};
  if (deflateInit2(&zs, 9, Z_DEFLATED, -15, 9, Z_DEFAULT_STRATEGY) != Z_OK)
    throw std::runtime_error("deflateInit2 failed");
  std::vector<std::uint8_t> out(deflateBound(&zs, static_cast<uLong>(seq.size())));
  zs.next_in = const_cast<Bytef*>(seq.symbols().data());
  zs.avail_in = static_cast<uInt>(seq.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw std::runtime_error("deflate did not finish");
  out.resize(produced);
  return {out, 8 * static_cast<std::uint64_t>(produced)};
}

std::vector<std::uint8_t> deflate_decode(const EncodedStream& stream) {
  z_stream zs{};
  if (inflateInit2(&zs, -15) != Z_OK) throw std::runtime_error("inflateInit2 failed");
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 15> chunk{};
  zs.next_in = const_cast<Bytef*>(stream.bytes.data());
  zs.avail_in = static_cast<uInt>(stream.bytes.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw std::runtime_error("corrupt DEFLATE stream");
    }
    out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw std::runtime_error("truncated DEFLATE stream");
    }
  }
  inflateEnd(&zs);
  return out;
}

// -- run-length ---------------------------------------------------------------

EncodedStream rle_encode(const SymbolSequence& seq) {
  std::vector<std::uint8_t> out;
  const auto s = seq.symbols();
  for (std::size_t i = 0; i < s.size();) {
    std::size_t run = 1;
    while (i + run < s.size() && s[i + run] == s[i] && run < 256) ++run;
    out.push_back(s[i]);
    out.push_back(static_cast<std::uint8_t>(run - 1));
    i += run;
  }
  const auto bits = 8 * static_cast<std::uint64_t>(out.size());
  return {std::move(out), bits};
}

std::vector<std::uint8_t> rle_decode(const EncodedStream& stream) {
  if (stream.bytes.size() % 2 != 0) throw std::runtime_error("rle stream has odd length");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < stream.bytes.size(); i += 2)
    out.insert(out.end(), std::size_t{stream.bytes[i + 1]} + 1, stream.bytes[i]);
  return out;
}

}  // namespace

// -- block sorting ------------------------------------------------------------

BwtResult bwt_forward(std::span<const std::uint8_t> block) {
  // Suffix array of block + marker by prefix doubling; index n is the marker.
  const std::size_t n = block.size();
  const std::size_t total = n + 1;
  std::vector<std::size_t> sa(total), rank(total), tmp(total);
  for (std::size_t i = 0; i < n; ++i) rank[i] = std::size_t{block[i]} + 1;
  rank[n] = 0;
  std::iota(sa.begin(), sa.end(), std::size_t{0});
  for (std::size_t h = 1;; h <<= 1) {
    auto key2 = [&](std::size_t i) { return i + h < total ? rank[i + h] + 1 : 0; };
    auto less = [&](std::size_t a, std::size_t b) {
      return rank[a] != rank[b] ? rank[a] < rank[b] : key2(a) < key2(b);
    };
    std::sort(sa.begin(), sa.end(), less);
    tmp[sa[0]] = 0;
    for (std::size_t i = 1; i < total; ++i) tmp[sa[i]] = tmp[sa[i - 1]] + (less(sa[i - 1], sa[i]) ? 1 : 0);
    rank.swap(tmp);
    if (rank[sa[total - 1]] == total - 1) break;
  }
  BwtResult out;
  out.last_column.reserve(n);
  for (std::size_t row = 0; row < total; ++row) {
    if (sa[row] == 0)
      out.marker_row = row;
    else
      out.last_column.push_back(block[sa[row] - 1]);
  }
  return out;
}

std::vector<std::uint8_t> bwt_inverse(const BwtResult& bwt) {
  const std::size_t n = bwt.last_column.size();
  const std::size_t total = n + 1;
  if (bwt.marker_row > n) throw std::runtime_error("BWT marker row out of range");
  // Symbol of each row of the last column; 0 is the marker, bytes shift by one.
  auto sym = [&](std::size_t row) -> std::size_t {
    if (row == bwt.marker_row) return 0;
    return std::size_t{bwt.last_column[row < bwt.marker_row ? row : row - 1]} + 1;
  };
  std::array<std::size_t, 258> start{};
  for (std::size_t row = 0; row < total; ++row) ++start[sym(row) + 1];
  for (std::size_t c = 1; c < start.size(); ++c) start[c] += start[c - 1];
  std::vector<std::size_t> lf(total);
  std::array<std::size_t, 257> seen{};
  for (std::size_t row = 0; row < total; ++row) {
    const auto c = sym(row);
    lf[row] = start[c] + seen[c]++;
  }
  // Row 0 holds the suffix consisting of the marker alone.
  std::vector<std::uint8_t> out(n);
  std::size_t row = 0;
  for (std::size_t i = n; i-- > 0;) {
    const auto c = sym(row);
    if (c == 0) throw std::runtime_error("corrupt BWT");
    out[i] = static_cast<std::uint8_t>(c - 1);
    row = lf[row];
  }
  return out;
}

namespace {

constexpr std::size_t kBlockSize = 900000;
constexpr unsigned kBlockMaxCodeLen = 17;
constexpr unsigned kRunA = 0, kRunB = 1;

// Code lengths as deltas from the previous one: start in 5 bits, then per
// symbol a string of "1x" steps (x=0 up, x=1 down) closed by a 0 bit.
void put_lengths(BitWriter& out, const std::vector<std::uint8_t>& lengths) {
  int cur = lengths.empty() ? 0 : lengths[0];
  out.put(static_cast<std::uint32_t>(cur), 5);
  for (auto l : lengths) {
    while (cur < l) { out.put(0b10, 2); ++cur; }
    while (cur > l) { out.put(0b11, 2); --cur; }
    out.put_bit(0);
  }
}

std::vector<std::uint8_t> get_lengths(BitReader& in, std::size_t count) {
  std::vector<std::uint8_t> lengths(count);
  int cur = static_cast<int>(in.get(5));
  for (auto& l : lengths) {
    while (in.get_bit()) cur += in.get_bit() ? -1 : 1;
    if (cur < 0 || cur > 31) throw std::runtime_error("bad code length");
    l = static_cast<std::uint8_t>(cur);
  }
  return lengths;
}

void blocksort_encode_block(BitWriter& out, std::span<const std::uint8_t> block, bool last,
                            unsigned alphabet_size) {
  out.put_bit(last ? 1 : 0);
  std::vector<bool> used(alphabet_size, false);
  for (auto s : block) used[s] = true;
  std::vector<std::uint8_t> mtf;  // used symbols, front = most recent
  for (unsigned s = 0; s < alphabet_size; ++s) {
    out.put_bit(used[s] ? 1 : 0);
    if (used[s]) mtf.push_back(static_cast<std::uint8_t>(s));
  }
  const auto bwt = bwt_forward(block);
  out.put(static_cast<std::uint32_t>(bwt.marker_row), 24);

  // MTF ranks, zero runs in bijective base 2 (RUNA=1, RUNB=2), rank v -> v+1.
  const std::size_t k = mtf.size();
  const std::uint32_t eob = static_cast<std::uint32_t>(k + 1);
  std::vector<std::uint32_t> symbols;
  symbols.reserve(block.size() + 1);
  std::size_t zeros = 0;
  auto flush_zeros = [&] {
    while (zeros > 0) {
      if (zeros & 1U) {
        symbols.push_back(kRunA);
        zeros = (zeros - 1) / 2;
      } else {
        symbols.push_back(kRunB);
        zeros = (zeros - 2) / 2;
      }
    }
  };
  for (auto c : bwt.last_column) {
    const auto it = std::find(mtf.begin(), mtf.end(), c);
    const auto rank = static_cast<std::uint32_t>(it - mtf.begin());
    std::rotate(mtf.begin(), it, it + 1);
    if (rank == 0) {
      ++zeros;
    } else {
      flush_zeros();
      symbols.push_back(rank + 1);
    }
  }
  flush_zeros();
  symbols.push_back(eob);

  std::vector<std::uint64_t> freq(k + 2, 0);
  for (auto s : symbols) ++freq[s];
  const auto code = canonical_code(huffman_code_lengths(freq, kBlockMaxCodeLen));
  put_lengths(out, code.lengths);
  for (auto s : symbols) out.put(code.codes[s], code.lengths[s]);
}

EncodedStream blocksort_encode(const SymbolSequence& seq) {
  BitWriter out;
  const auto s = seq.symbols();
  for (std::size_t begin = 0; begin < s.size(); begin += kBlockSize) {
    const std::size_t len = std::min(kBlockSize, s.size() - begin);
    blocksort_encode_block(out, s.subspan(begin, len), begin + len >= s.size(), seq.alphabet_size());
  }
  const auto bits = out.bits();
  return {out.take(), bits};
}

std::vector<std::uint8_t> blocksort_decode(const EncodedStream& stream, unsigned alphabet_size) {
  BitReader in(stream.bytes, stream.bits);
  std::vector<std::uint8_t> out;
  bool last = false;
  while (!last) {
    last = in.get_bit() != 0;
    std::vector<std::uint8_t> mtf;
    for (unsigned s = 0; s < alphabet_size; ++s)
      if (in.get_bit()) mtf.push_back(static_cast<std::uint8_t>(s));
    if (mtf.empty()) throw std::runtime_error("blocksort block without symbols");
    BwtResult bwt;
    bwt.marker_row = in.get(24);
    const std::size_t k = mtf.size();
    const CanonicalDecoder decoder(get_lengths(in, k + 2));
    std::size_t run = 0, weight = 1;
    auto flush_run = [&] {
      bwt.last_column.insert(bwt.last_column.end(), run, mtf.front());
      run = 0;
      weight = 1;
    };
    for (;;) {
      const std::uint32_t sym = decoder.decode(in);
      if (sym == kRunA || sym == kRunB) {
        run += weight * (sym == kRunA ? 1 : 2);
        weight <<= 1;
        continue;
      }
      flush_run();
      if (sym == k + 1) break;
      const std::size_t rank = sym - 1;
      if (rank >= k) throw std::runtime_error("blocksort rank out of range");
      const auto c = mtf[rank];
      std::rotate(mtf.begin(), mtf.begin() + static_cast<std::ptrdiff_t>(rank),
                  mtf.begin() + static_cast<std::ptrdiff_t>(rank) + 1);
      bwt.last_column.push_back(c);
    }
    const auto block = bwt_inverse(bwt);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

}  // namespace

EncodedStream compress(Coder coder, const SymbolSequence& sequence) {
  switch (coder) {
    case Coder::huffman0: return huffman0_encode(sequence);
    case Coder::lz_deflate: return deflate_encode(sequence);
    case Coder::blocksort: return blocksort_encode(sequence);
    case Coder::rle: return rle_encode(sequence);
  }
  throw std::invalid_argument("unknown coder");
}

std::vector<std::uint8_t> decompress(Coder coder, const EncodedStream& stream, unsigned alphabet_size) {
  if (alphabet_size < 2 || alphabet_size > 256) throw std::invalid_argument("alphabet_size must be in [2,256]");
  switch (coder) {
    case Coder::huffman0: return huffman0_decode(stream, alphabet_size);
    case Coder::lz_deflate: return deflate_decode(stream);
    case Coder::blocksort: return blocksort_decode(stream, alphabet_size);
    case Coder::rle: return rle_decode(stream);
  }
  throw std::invalid_argument("unknown coder");
}

CodeLength codelength(Coder coder, const SymbolSequence& sequence) {
  const auto stream = compress(coder, sequence);
  return {stream.bits, static_cast<double>(stream.bits) / static_cast<double>(sequence.size())};
}

}  // namespace caa::coders
