// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rankstego::codec {

// Ordered bit sequence. Multi-bit values are appended and read MSB first.
class BitStream {
 public:
  BitStream() = default;

  // Parses a string of '0'/'1' characters; anything else throws
  // ParameterError.
  static BitStream from_string(std::string_view bits);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  bool operator[](std::size_t i) const { return bits_[i]; }

  void push_back(bool bit) { bits_.push_back(bit); }
  void append(const BitStream& other);
  // Low `width` bits of `value`, most significant first. width <= 64.
  void append_bits(std::uint64_t value, unsigned width);
  // Reads `width` bits starting at `pos` as a big-endian integer.
  std::uint64_t read_bits(std::size_t pos, unsigned width) const;

  BitStream slice(std::size_t pos, std::size_t len) const;
  void resize(std::size_t n) { bits_.resize(n, false); }

  // Bitwise XOR; lengths must match.
  BitStream operator^(const BitStream& other) const;

  std::string to_string() const;

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<bool> bits_;
};

}  // namespace rankstego::codec
