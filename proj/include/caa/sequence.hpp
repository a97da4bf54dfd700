#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace caa {

/// How a sequence was produced: generator name, its parameters and seed.
/// `body_start` is the index where the scored, aligned part begins (nonzero
/// only for sources with an unscored preamble, e.g. the XOR-crypto prefix).
struct SourceDescriptor {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::size_t body_start = 0;
};

void to_json(nlohmann::json& j, const SourceDescriptor& d);
void from_json(const nlohmann::json& j, SourceDescriptor& d);

/// A finite sample over the alphabet {0, ..., alphabet_size-1}, with
/// 2 <= alphabet_size <= 256 so every symbol fits in one byte.
class SymbolSequence {
 public:
  SymbolSequence(std::vector<std::uint8_t> symbols, unsigned alphabet_size,
                 SourceDescriptor meta = {});

  std::span<const std::uint8_t> symbols() const noexcept { return symbols_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  unsigned alphabet_size() const noexcept { return alphabet_size_; }
  const SourceDescriptor& meta() const noexcept { return meta_; }
  std::uint8_t operator[](std::size_t i) const { return symbols_[i]; }

  /// FNV-1a over alphabet size and symbols; identifies the sample in reports.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const SymbolSequence& a, const SymbolSequence& b) noexcept {
    return a.alphabet_size_ == b.alphabet_size_ && a.symbols_ == b.symbols_;
  }

 private:
  std::vector<std::uint8_t> symbols_;
  unsigned alphabet_size_;
  SourceDescriptor meta_;
};

// Flat binary layout (little-endian):
//   u32 alphabet_size | u64 length | length bytes, one symbol per byte
void write_binary(const SymbolSequence& seq, std::ostream& out);
SymbolSequence read_binary(std::istream& in, SourceDescriptor meta = {});

nlohmann::json to_json(const SymbolSequence& seq);
SymbolSequence sequence_from_json(const nlohmann::json& j);

/// Writes `<path>` (flat binary) and `<path>.json` (descriptor sidecar).
void save_sequence(const SymbolSequence& seq, const std::filesystem::path& path);
SymbolSequence load_sequence(const std::filesystem::path& path);

}  // namespace caa
