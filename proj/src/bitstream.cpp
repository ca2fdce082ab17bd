#include "stochimc/bitstream.hpp"

#include <array>
#include <bit>
#include <istream>
#include <ostream>
#include <string>

#include "stochimc/errors.hpp"

namespace stochimc {

namespace {

constexpr std::size_t word_count(std::size_t bits) { return (bits + 63) / 64; }

// Child stream shared by every stream of one lineage.
constexpr std::uint64_t lineage_stream(std::uint64_t lineage) {
  return splitmix64(lineage ^ hash_label("lineage"));
}

std::uint64_t threshold_word(const RandomSource& src, double p, std::size_t first_bit, std::size_t count) {
  std::uint64_t word = 0;
  for (std::size_t b = 0; b < count; ++b)
    if (src.uniform(first_bit + b) < p) word |= std::uint64_t{1} << b;
  return word;
}

void fill_threshold(Bitstream& bs, const RandomSource& src, double p, ExecPolicy policy) {
  auto words = bs.words();
  const std::size_t length = bs.size();
  const auto n = static_cast<std::ptrdiff_t>(words.size());
  auto count_for = [length](std::ptrdiff_t w) {
    std::size_t first = static_cast<std::size_t>(w) * 64;
    return length - first < 64 ? length - first : std::size_t{64};
  };
  if (policy == ExecPolicy::Parallel) {
#pragma omp parallel for schedule(static) if (n > 64)
    for (std::ptrdiff_t w = 0; w < n; ++w)
      words[static_cast<std::size_t>(w)] = threshold_word(src, p, static_cast<std::size_t>(w) * 64, count_for(w));
  } else {
    for (std::ptrdiff_t w = 0; w < n; ++w)
      words[static_cast<std::size_t>(w)] = threshold_word(src, p, static_cast<std::size_t>(w) * 64, count_for(w));
  }
}

}  // namespace

Bitstream::Bitstream(std::size_t length, bool fill)
    : length_(length), words_(word_count(length), fill ? ~std::uint64_t{0} : 0) {
  trim();
}

std::size_t Bitstream::ones() const {
  std::size_t total = 0;
  for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

double Bitstream::value() const {
  if (length_ == 0) throw DomainError("value of an empty bitstream");
  return static_cast<double>(ones()) / static_cast<double>(length_);
}

void Bitstream::trim() {
  if (length_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (length_ % 64)) - 1;
}

Bitstream Bitstream::slice(std::size_t first, std::size_t count) const {
  if (first + count > length_) throw DomainError("slice out of range");
  Bitstream out(count);
  for (std::size_t i = 0; i < count; ++i)
    if (get(first + i)) out.set(i, true);
  out.lineage_ = lineage_;
  return out;
}

void Bitstream::write_packed(std::ostream& out) const {
  std::array<char, 8> header{};
  auto len = static_cast<std::uint64_t>(length_);
  for (std::size_t i = 0; i < 8; ++i) header[i] = static_cast<char>((len >> (8 * i)) & 0xFF);
  out.write(header.data(), header.size());
  for (std::size_t byte = 0; byte < (length_ + 7) / 8; ++byte) {
    auto v = static_cast<char>((words_[byte / 8] >> (8 * (byte % 8))) & 0xFF);
    out.put(v);
  }
}

Bitstream Bitstream::read_packed(std::istream& in) {
  std::array<char, 8> header{};
  if (!in.read(header.data(), header.size())) throw ParseError("truncated bitstream header", 0);
  std::uint64_t len = 0;
  for (std::size_t i = 0; i < 8; ++i) len |= static_cast<std::uint64_t>(static_cast<unsigned char>(header[i])) << (8 * i);
  Bitstream bs(static_cast<std::size_t>(len));
  for (std::size_t byte = 0; byte < (len + 7) / 8; ++byte) {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ParseError("truncated bitstream payload", 8 + byte);
    bs.words_[byte / 8] |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * (byte % 8));
  }
  bs.trim();
  return bs;
}

Bitstream encode_unipolar(double p, std::size_t length, const RandomSource& source,
                          std::optional<std::uint64_t> shared_lineage, ExecPolicy policy) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("probability " + std::to_string(p) + " outside [0,1]");
  Bitstream bs(length);
  RandomSource src = shared_lineage ? source.child(lineage_stream(*shared_lineage)) : source;
  fill_threshold(bs, src, p, policy);
  bs.set_lineage(shared_lineage);
  return bs;
}

double decode_unipolar(const Bitstream& bs) { return bs.value(); }

BtosTable::BtosTable(unsigned resolution, std::vector<std::optional<PulseSpec>> entries)
    : resolution_(resolution), entries_(std::move(entries)) {
  if (entries_.size() != (std::size_t{1} << resolution)) throw DomainError("BtoS table size must be 2^resolution");
  if (entries_[0].has_value()) throw DomainError("BtoS entry 0 must not carry a pulse");
}

BtosTable build_btos_table(const MtjParams& params, unsigned resolution, std::span<const double> t_p_grid,
                           const PulseLimits& limits) {
  if (resolution < 1 || resolution > 16) throw DomainError("resolution must be in [1,16]");
  const std::size_t size = std::size_t{1} << resolution;
  std::vector<std::optional<PulseSpec>> entries(size);
  for (std::size_t k = 1; k < size; ++k)
    entries[k] = min_energy_pulse(params, static_cast<double>(k) / static_cast<double>(size), t_p_grid, limits);
  return BtosTable(resolution, std::move(entries));
}

Bitstream mtj_generate(const MtjParams& params, const BtosTable& table, std::size_t binary_value,
                       std::size_t length, const RandomSource& source) {
  if (binary_value >= table.size()) throw DomainError("binary value outside the BtoS table");
  const auto& pulse = table.entry(binary_value);
  if (!pulse) return Bitstream(length);
  Bitstream bs(length);
  fill_threshold(bs, source, switching_probability(params, *pulse), ExecPolicy::Parallel);
  return bs;
}

}  // namespace stochimc
