#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace caa::coders::detail {

// MSB-first bit packing.
class BitWriter {
 public:
  void put(std::uint32_t value, unsigned nbits) {
    for (unsigned i = nbits; i-- > 0;) put_bit((value >> i) & 1U);
  }

  void put_bit(unsigned bit) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80U >> (bits_ % 8));
    ++bits_;
  }

  std::uint64_t bits() const noexcept { return bits_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bits) : bytes_(bytes), bits_(bits) {
    if (bits_ > 8 * static_cast<std::uint64_t>(bytes_.size()))
      throw std::runtime_error("bit count exceeds stream size");
  }

  unsigned get_bit() {
    if (pos_ >= bits_) throw std::runtime_error("read past end of bit stream");
    const unsigned bit = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1U;
    ++pos_;
    return bit;
  }

  std::uint32_t get(unsigned nbits) {
    std::uint32_t v = 0;
    for (unsigned i = 0; i < nbits; ++i) v = (v << 1) | get_bit();
    return v;
  }

  std::uint64_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t bits_;
  std::uint64_t pos_ = 0;
};

}  // namespace caa::coders::detail
