// SPDX-License-Identifier: Apache-2.0

#include "rankstego/codec/codebook.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

#include "rankstego/error.hpp"

namespace rankstego::codec {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'C', 'B', '1'};
constexpr std::uint32_t kMaxCodeLength = 1u << 16;

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw FormatError("codebook file truncated");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

// Binary increment in place; returns false on overflow.
bool increment(std::vector<bool>& code) {
  for (std::size_t i = code.size(); i-- > 0;) {
    if (!code[i]) {
      code[i] = true;
      return true;
    }
    code[i] = false;
  }
  return false;
}

}  // namespace

std::vector<std::uint32_t> huffman_code_lengths(
    std::span<const std::uint64_t> weights) {
  const std::size_t n = weights.size();
  if (n < 2) throw ParameterError("Huffman code needs at least two symbols");

  struct Node {
    std::uint64_t weight;
    std::size_t lowest;
    std::size_t left, right;  // n for leaves
  };
  std::vector<Node> nodes;
  nodes.reserve(2 * n - 1);
  for (std::size_t s = 0; s < n; ++s) nodes.push_back({weights[s], s, n, n});

  auto heavier = [&](std::size_t a, std::size_t b) {
    if (nodes[a].weight != nodes[b].weight) {
      return nodes[a].weight > nodes[b].weight;
    }
    return nodes[a].lowest > nodes[b].lowest;
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(heavier)>
      queue(heavier);
  for (std::size_t s = 0; s < n; ++s) queue.push(s);
  while (queue.size() > 1) {
    const std::size_t a = queue.top();
    queue.pop();
    const std::size_t b = queue.top();
    queue.pop();
    nodes.push_back({nodes[a].weight + nodes[b].weight,
                     std::min(nodes[a].lowest, nodes[b].lowest), a, b});
    queue.push(nodes.size() - 1);
  }

  std::vector<std::uint32_t> lengths(n, 0);
  std::vector<std::pair<std::size_t, std::uint32_t>> stack{{queue.top(), 0}};
  while (!stack.empty()) {
    auto [idx, depth] = stack.back();
    stack.pop_back();
    if (idx < n) {
      lengths[idx] = depth;
      continue;
    }
    stack.emplace_back(nodes[idx].left, depth + 1);
    stack.emplace_back(nodes[idx].right, depth + 1);
  }
  return lengths;
}

Codebook Codebook::from_lengths(std::uint32_t table_size,
                                std::uint32_t escape_width,
                                std::vector<std::uint32_t> lengths) {
  if (table_size < 2) throw ParameterError("codebook table size must be >= 2");
  if (escape_width < 1 || escape_width > 32) {
    throw FormatError("escape width must be in [1, 32]");
  }
  if (lengths.size() != static_cast<std::size_t>(table_size) + 1) {
    throw FormatError("codebook needs K+1 code lengths");
  }
  for (std::uint32_t l : lengths) {
    if (l == 0 || l > kMaxCodeLength) {
      throw FormatError("code length out of range");
    }
  }

  Codebook cb;
  cb.table_size_ = table_size;
  cb.escape_width_ = escape_width;
  cb.lengths_ = std::move(lengths);

  std::vector<std::uint32_t> symbols(cb.lengths_.size());
  std::iota(symbols.begin(), symbols.end(), 0u);
  std::sort(symbols.begin(), symbols.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (cb.lengths_[a] != cb.lengths_[b]) return cb.lengths_[a] < cb.lengths_[b];
    return a < b;
  });

  cb.codes_.resize(cb.lengths_.size());
  std::vector<bool> code(cb.lengths_[symbols.front()], false);
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const std::uint32_t sym = symbols[i];
    if (i > 0) {
      if (!increment(code)) {
        throw FormatError("code lengths violate the Kraft inequality");
      }
      code.resize(cb.lengths_[sym], false);
    }
    BitStream bits;
    for (bool b : code) bits.push_back(b);
    cb.codes_[sym] = std::move(bits);
  }
  if (!std::all_of(code.begin(), code.end(), [](bool b) { return b; })) {
    throw FormatError("code lengths do not form a complete prefix code");
  }

  cb.trie_.emplace_back();
  for (std::uint32_t sym = 0; sym < cb.codes_.size(); ++sym) {
    std::int32_t at = 0;
    const BitStream& c = cb.codes_[sym];
    for (std::size_t i = 0; i < c.size(); ++i) {
      const int bit = c[i] ? 1 : 0;
      if (cb.trie_[at].child[bit] < 0) {
        cb.trie_[at].child[bit] = static_cast<std::int32_t>(cb.trie_.size());
        cb.trie_.emplace_back();
      }
      at = cb.trie_[at].child[bit];
    }
    cb.trie_[at].symbol = static_cast<std::int32_t>(sym);
  }
  return cb;
}

void Codebook::encode(Rank rank, BitStream& out) const {
  if (rank < table_size_) {
    out.append(codes_[rank]);
    return;
  }
  if (escape_width_ < 32 && (rank >> escape_width_) != 0) {
    throw RangeError("rank " + std::to_string(rank) + " does not fit in " +
                     std::to_string(escape_width_) + " escape bits");
  }
  out.append(codes_[table_size_]);
  out.append_bits(rank, escape_width_);
}

RankSequence Codebook::decode(const BitStream& bits) const {
  RankSequence ranks;
  std::size_t pos = 0;
  std::int32_t at = 0;
  while (pos < bits.size()) {
    at = trie_[at].child[bits[pos++] ? 1 : 0];
    const std::int32_t sym = trie_[at].symbol;
    if (sym < 0) continue;
    if (static_cast<std::uint32_t>(sym) < table_size_) {
      ranks.push_back(static_cast<Rank>(sym));
    } else {
      if (bits.size() - pos < escape_width_) break;
      ranks.push_back(static_cast<Rank>(bits.read_bits(pos, escape_width_)));
      pos += escape_width_;
    }
    at = 0;
  }
  return ranks;
}

void Codebook::save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, table_size_);
  put_u32(out, escape_width_);
  for (std::uint32_t sym = 0; sym < lengths_.size(); ++sym) {
    put_u32(out, sym);
    put_u32(out, lengths_[sym]);
  }
  if (!out) throw FormatError("failed writing codebook");
}

Codebook Codebook::load(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("not an RCB1 codebook file");
  }
  const std::uint32_t k = get_u32(in);
  const std::uint32_t width = get_u32(in);
  if (k < 2 || k > (1u << 24)) throw FormatError("codebook K out of range");
  std::vector<std::uint32_t> lengths(static_cast<std::size_t>(k) + 1);
  for (std::uint32_t i = 0; i <= k; ++i) {
    if (get_u32(in) != i) throw FormatError("codebook symbols out of order");
    lengths[i] = get_u32(in);
  }
  return from_lengths(k, width, std::move(lengths));
}

Codebook build_codebook(const RankHistogram& histogram,
                        std::uint32_t table_size, std::size_t vocab_size) {
  if (table_size < 2) throw ParameterError("K must be >= 2");
  if (table_size > vocab_size) throw ParameterError("K must not exceed |V|");
  if (histogram.empty()) throw ParameterError("empty rank histogram");

  std::vector<std::uint64_t> weights(static_cast<std::size_t>(table_size) + 1, 0);
  weights[table_size] = 1;
  for (auto [rank, count] : histogram) {
    if (rank < table_size) {
      weights[rank] += count;
    } else {
      weights[table_size] += count;
    }
  }
  const auto width = static_cast<std::uint32_t>(
      std::bit_width(static_cast<std::uint64_t>(vocab_size - 1)));
  return Codebook::from_lengths(table_size, std::max(width, 1u),
                                huffman_code_lengths(weights));
}

BitStream encode_ranks(const Codebook& codebook, std::span<const Rank> ranks) {
  BitStream out;
  for (Rank r : ranks) codebook.encode(r, out);
  return out;
}

RankSequence decode_ranks(const Codebook& codebook, const BitStream& bits) {
  return codebook.decode(bits);
}

}  // namespace rankstego::codec
