// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rankstego/codec/bitstream.hpp"
#include "rankstego/ranking.hpp"

namespace rankstego::codec {

using ranking::Rank;
using ranking::RankHistogram;
using ranking::RankSequence;

inline constexpr std::uint32_t kDefaultTableSize = 256;

// Prefix-free rank code: canonical Huffman codes for ranks [0, K) plus an
// escape codeword. A rank r >= K is written as the escape codeword followed
// by r in escape_width bits, big-endian.
class Codebook {
 public:
  // Symbols 0..K-1 are ranks, symbol K is the escape. Codes are assigned
  // canonically: sorted by (length, symbol), consecutive binary values.
  // The lengths must describe a complete prefix code (Kraft sum exactly 1);
  // otherwise FormatError.
  static Codebook from_lengths(std::uint32_t table_size,
                               std::uint32_t escape_width,
                               std::vector<std::uint32_t> lengths);

  std::uint32_t table_size() const { return table_size_; }
  std::uint32_t escape_width() const { return escape_width_; }
  std::uint32_t escape_symbol() const { return table_size_; }
  const std::vector<std::uint32_t>& lengths() const { return lengths_; }
  const BitStream& code(std::uint32_t symbol) const { return codes_.at(symbol); }

  // Throws RangeError if rank does not fit in escape_width bits.
  void encode(Rank rank, BitStream& out) const;

  // Greedy left-to-right decode. A trailing partial codeword (or an escape
  // missing some of its payload bits) is padding and is dropped.
  RankSequence decode(const BitStream& bits) const;

  // "RCB1" container: K, escape_width, then K+1 (symbol, length) pairs,
  // all little-endian uint32.
  void save(std::ostream& out) const;
  static Codebook load(std::istream& in);

  friend bool operator==(const Codebook& a, const Codebook& b) {
    return a.table_size_ == b.table_size_ &&
           a.escape_width_ == b.escape_width_ && a.lengths_ == b.lengths_;
  }

 private:
  struct Node {
    std::int32_t child[2] = {-1, -1};
    std::int32_t symbol = -1;
  };

  std::uint32_t table_size_ = 0;
  std::uint32_t escape_width_ = 0;
  std::vector<std::uint32_t> lengths_;
  std::vector<BitStream> codes_;
  std::vector<Node> trie_;
};

// Huffman code lengths for the given weights (zero weights allowed). Merge
// order is (weight, lowest contained symbol), which fixes the tree shape.
// Needs at least two symbols.
std::vector<std::uint32_t> huffman_code_lengths(
    std::span<const std::uint64_t> weights);

// Canonical Huffman over ranks [0, K) weighted by their histogram counts,
// plus an escape symbol weighted by the histogram mass at ranks >= K plus
// one. Escape width is ceil(log2 vocab_size). Requires 2 <= K <= vocab_size.
Codebook build_codebook(const RankHistogram& histogram,
                        std::uint32_t table_size, std::size_t vocab_size);

BitStream encode_ranks(const Codebook& codebook, std::span<const Rank> ranks);
RankSequence decode_ranks(const Codebook& codebook, const BitStream& bits);

}  // namespace rankstego::codec
