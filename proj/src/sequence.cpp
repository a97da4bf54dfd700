#include "caa/sequence.hpp"

#include <array>
#include <fstream>
#include <stdexcept>

#include "caa/rng.hpp"

namespace caa {

void to_json(nlohmann::json& j, const SourceDescriptor& d) {
  j = nlohmann::json{{"name", d.name},
                     {"params", d.params},
                     {"seed", d.seed},
                     {"body_start", d.body_start},
                     {"rng", kRngAlgorithm}};
}

void from_json(const nlohmann::json& j, SourceDescriptor& d) {
  d.name = j.value("name", std::string{});
  d.params = j.value("params", nlohmann::json::object());
  d.seed = j.value("seed", std::uint64_t{0});
  d.body_start = j.value("body_start", std::size_t{0});
}

SymbolSequence::SymbolSequence(std::vector<std::uint8_t> symbols, unsigned alphabet_size,
                               SourceDescriptor meta)
    : symbols_(std::move(symbols)), alphabet_size_(alphabet_size), meta_(std::move(meta)) {
  if (alphabet_size_ < 2 || alphabet_size_ > 256)
    throw std::invalid_argument("alphabet_size must be in [2, 256]");
  if (symbols_.empty()) throw std::invalid_argument("sequence must be nonempty");
  for (auto s : symbols_)
    if (s >= alphabet_size_) throw std::invalid_argument("symbol outside alphabet");
  if (meta_.body_start >= symbols_.size())
    throw std::invalid_argument("body_start beyond sequence end");
}

std::uint64_t SymbolSequence::fingerprint() const noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001B3ULL;
  };
  for (int i = 0; i < 4; ++i) mix(static_cast<std::uint8_t>(alphabet_size_ >> (8 * i)));
  for (auto s : symbols_) mix(s);
  return h;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i)
    buf[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
  out.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!in) throw std::runtime_error("truncated sequence header");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

void write_binary(const SymbolSequence& seq, std::ostream& out) {
  put_le<std::uint32_t>(out, seq.alphabet_size());
  put_le<std::uint64_t>(out, seq.size());
  out.write(reinterpret_cast<const char*>(seq.symbols().data()),
            static_cast<std::streamsize>(seq.size()));
}

SymbolSequence read_binary(std::istream& in, SourceDescriptor meta) {
  const auto alphabet = get_le<std::uint32_t>(in);
  const auto length = get_le<std::uint64_t>(in);
  std::vector<std::uint8_t> symbols(length);
  in.read(reinterpret_cast<char*>(symbols.data()), static_cast<std::streamsize>(length));
  if (static_cast<std::uint64_t>(in.gcount()) != length)
    throw std::runtime_error("truncated sequence body");
  return SymbolSequence(std::move(symbols), alphabet, std::move(meta));
}

nlohmann::json to_json(const SymbolSequence& seq) {
  return nlohmann::json{{"alphabet_size", seq.alphabet_size()},
                        {"symbols", std::vector<int>(seq.symbols().begin(), seq.symbols().end())},
                        {"meta", seq.meta()}};
}

SymbolSequence sequence_from_json(const nlohmann::json& j) {
  auto raw = j.at("symbols").get<std::vector<int>>();
  std::vector<std::uint8_t> symbols;
  symbols.reserve(raw.size());
  for (int s : raw) {
    if (s < 0 || s > 255) throw std::invalid_argument("symbol out of byte range");
    symbols.push_back(static_cast<std::uint8_t>(s));
  }
  return SymbolSequence(std::move(symbols), j.at("alphabet_size").get<unsigned>(),
                        j.value("meta", SourceDescriptor{}));
}

void save_sequence(const SymbolSequence& seq, const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_binary(seq, out);
  }
  std::ofstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("cannot write sidecar for " + path.string());
  side << nlohmann::json(seq.meta()).dump(2) << '\n';
}

SymbolSequence load_sequence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  SourceDescriptor meta;
  if (std::ifstream side(path.string() + ".json"); side) meta = nlohmann::json::parse(side);
  return read_binary(in, std::move(meta));
}

}  // namespace caa
