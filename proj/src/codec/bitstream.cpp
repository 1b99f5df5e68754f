// SPDX-License-Identifier: Apache-2.0

#include "rankstego/codec/bitstream.hpp"

#include "rankstego/error.hpp"

namespace rankstego::codec {

BitStream BitStream::from_string(std::string_view bits) {
  BitStream out;
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw ParameterError("bit string may only contain 0 and 1");
    }
    out.push_back(c == '1');
  }
  return out;
}

void BitStream::append(const BitStream& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

void BitStream::append_bits(std::uint64_t value, unsigned width) {
  if (width > 64) throw ParameterError("append_bits: width > 64");
  for (unsigned i = width; i-- > 0;) bits_.push_back((value >> i) & 1u);
}

std::uint64_t BitStream::read_bits(std::size_t pos, unsigned width) const {
  if (width > 64 || pos + width > bits_.size()) {
    throw RangeError("read_bits past end of stream");
  }
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i) v = (v << 1) | bits_[pos + i];
  return v;
}

BitStream BitStream::slice(std::size_t pos, std::size_t len) const {
  if (pos > bits_.size() || len > bits_.size() - pos) {
    throw RangeError("slice past end of stream");
  }
  BitStream out;
  out.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
                   bits_.begin() + static_cast<std::ptrdiff_t>(pos + len));
  return out;
}

BitStream BitStream::operator^(const BitStream& other) const {
  if (other.size() != size()) {
    throw ParameterError("XOR of bit streams with different lengths");
  }
  BitStream out;
  out.bits_.resize(size());
  for (std::size_t i = 0; i < size(); ++i) out.bits_[i] = bits_[i] != other[i];
  return out;
}

std::string BitStream::to_string() const {
  std::string s;
  s.reserve(size());
  for (bool b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace rankstego::codec
