// SPDX-License-Identifier: Apache-2.0

#include "rankstego/codec/keystream.hpp"

#include <bit>

#include "rankstego/error.hpp"

namespace rankstego::codec {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::uint32_t load_le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void quarter_round(std::array<std::uint32_t, 16>& x, int a, int b, int c,
                   int d) {
  x[a] += x[b]; x[d] ^= x[a]; x[d] = std::rotl(x[d], 16);
  x[c] += x[d]; x[b] ^= x[c]; x[b] = std::rotl(x[b], 12);
  x[a] += x[b]; x[d] ^= x[a]; x[d] = std::rotl(x[d], 8);
  x[c] += x[d]; x[b] ^= x[c]; x[b] = std::rotl(x[b], 7);
}

}  // namespace

SecretKey SecretKey::from_hex(std::string_view hex) {
  if (hex.size() != 64) throw ParameterError("key must be 64 hex digits");
  std::array<std::uint8_t, 32> bytes{};
  for (std::size_t i = 0; i < 32; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ParameterError("key must be 64 hex digits");
    bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return SecretKey(bytes);
}

std::vector<std::uint8_t> chacha20_keystream(const SecretKey& key,
                                             std::size_t num_bytes) {
  std::array<std::uint32_t, 16> state{0x61707865, 0x3320646e, 0x79622d32,
                                      0x6b206574};
  for (int i = 0; i < 8; ++i) state[4 + i] = load_le32(&key.bytes()[4 * i]);
  // state[12] is the block counter, state[13..15] the nonce; both start at 0.

  std::vector<std::uint8_t> out;
  out.reserve(num_bytes);
  while (out.size() < num_bytes) {
    std::array<std::uint32_t, 16> x = state;
    for (int round = 0; round < 10; ++round) {
      quarter_round(x, 0, 4, 8, 12);
      quarter_round(x, 1, 5, 9, 13);
      quarter_round(x, 2, 6, 10, 14);
      quarter_round(x, 3, 7, 11, 15);
      quarter_round(x, 0, 5, 10, 15);
      quarter_round(x, 1, 6, 11, 12);
      quarter_round(x, 2, 7, 8, 13);
      quarter_round(x, 3, 4, 9, 14);
    }
    for (int i = 0; i < 16 && out.size() < num_bytes; ++i) {
      const std::uint32_t w = x[i] + state[i];
      for (int b = 0; b < 4 && out.size() < num_bytes; ++b) {
        out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
      }
    }
    if (++state[12] == 0) {
      throw ParameterError("keystream longer than 256 GiB requested");
    }
  }
  return out;
}

BitStream keystream_xor(const SecretKey& key, const BitStream& bits) {
  const std::vector<std::uint8_t> ks =
      chacha20_keystream(key, (bits.size() + 7) / 8);
  BitStream out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const bool k = (ks[i / 8] >> (7 - i % 8)) & 1u;
    out.push_back(bits[i] != k);
  }
  return out;
}

}  // namespace rankstego::codec
