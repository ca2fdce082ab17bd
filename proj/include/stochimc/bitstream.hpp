#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "stochimc/mtj.hpp"
#include "stochimc/random.hpp"

namespace stochimc {

// Fixed-length 0/1 sequence packed 64 bits per word, least significant bit first.
// Bits past the length in the last word are always zero.
class Bitstream {
 public:
  Bitstream() = default;
  explicit Bitstream(std::size_t length, bool fill = false);

  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v) {
    std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }
  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t ones() const;
  double value() const;

  std::span<std::uint64_t> words() { return words_; }
  std::span<const std::uint64_t> words() const { return words_; }
  // Clears padding bits after word-level writes.
  void trim();

  std::optional<std::uint64_t> lineage() const { return lineage_; }
  void set_lineage(std::optional<std::uint64_t> lineage) { lineage_ = lineage; }

  // Bits [first, first + count) as a new stream.
  Bitstream slice(std::size_t first, std::size_t count) const;

  bool operator==(const Bitstream& other) const { return length_ == other.length_ && words_ == other.words_; }

  // 8-byte little-endian length followed by ceil(length/8) bytes, LSB-first bit order.
  void write_packed(std::ostream& out) const;
  static Bitstream read_packed(std::istream& in);

 private:
  std::size_t length_ = 0;
  std::vector<std::uint64_t> words_;
  std::optional<std::uint64_t> lineage_;
};

enum class ExecPolicy { Serial, Parallel };

// Comparator encoding: bit i is 1 iff u_i < p. Independent streams draw uniforms from `source`;
// streams sharing a lineage draw from one child sequence of `source` keyed by the lineage, so
// they are maximally correlated.
Bitstream encode_unipolar(double p, std::size_t length, const RandomSource& source,
                          std::optional<std::uint64_t> shared_lineage = std::nullopt,
                          ExecPolicy policy = ExecPolicy::Parallel);

double decode_unipolar(const Bitstream& bs);

// Lookup from binary input values to write pulses. Entry 0 applies no pulse.
class BtosTable {
 public:
  BtosTable(unsigned resolution, std::vector<std::optional<PulseSpec>> entries);

  unsigned resolution() const { return resolution_; }
  std::size_t size() const { return entries_.size(); }
  const std::optional<PulseSpec>& entry(std::size_t k) const { return entries_.at(k); }
  double target(std::size_t k) const { return static_cast<double>(k) / static_cast<double>(entries_.size()); }

 private:
  unsigned resolution_;
  std::vector<std::optional<PulseSpec>> entries_;
};

BtosTable build_btos_table(const MtjParams& params, unsigned resolution, std::span<const double> t_p_grid,
                           const PulseLimits& limits = {});

// Each bit is an independent Bernoulli draw at the switching probability of the table entry.
Bitstream mtj_generate(const MtjParams& params, const BtosTable& table, std::size_t binary_value,
                       std::size_t length, const RandomSource& source);

}  // namespace stochimc
