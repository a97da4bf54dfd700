#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "caa/sequence.hpp"

// Lossless coders used as description-length observers. Each coder emits a
// self-delimiting bit stream; the codelength is the exact number of bits in
// that stream. The alphabet size of the input is side information shared by
// encoder and decoder.
namespace caa::coders {

enum class Coder {
  huffman0,    // static order-0 Huffman, canonical table in the header
  lz_deflate,  // raw DEFLATE (zlib, level 9)
  blocksort,   // BWT + move-to-front + zero-run coding + Huffman
  rle,         // (symbol, run length - 1) byte pairs
};

std::string to_string(Coder coder);
Coder coder_from_string(const std::string& name);
int coder_id(Coder coder) noexcept;
Coder coder_from_id(int id);

struct EncodedStream {
  std::vector<std::uint8_t> bytes;
  std::uint64_t bits = 0;  // meaningful bits; bytes are zero-padded to a byte boundary
};

struct CodeLength {
  std::uint64_t bits = 0;
  double bits_per_symbol = 0.0;
};

EncodedStream compress(Coder coder, const SymbolSequence& sequence);
std::vector<std::uint8_t> decompress(Coder coder, const EncodedStream& stream, unsigned alphabet_size);

CodeLength codelength(Coder coder, const SymbolSequence& sequence);

// Building blocks, exposed for testing.

/// Burrows-Wheeler transform of `block` followed by a virtual end marker
/// that sorts below every symbol. Returns the last column without the marker
/// and the row index where the marker sits.
struct BwtResult {
  std::vector<std::uint8_t> last_column;
  std::size_t marker_row = 0;
};
BwtResult bwt_forward(std::span<const std::uint8_t> block);
std::vector<std::uint8_t> bwt_inverse(const BwtResult& bwt);

/// Huffman code lengths for `freqs` limited to `max_len` bits; zero-frequency
/// symbols get length 0; a lone active symbol gets length 1.
std::vector<std::uint8_t> huffman_code_lengths(std::span<const std::uint64_t> freqs, unsigned max_len);

}  // namespace caa::coders
