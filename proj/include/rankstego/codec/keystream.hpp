// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rankstego/codec/bitstream.hpp"

namespace rankstego::codec {

// 32-byte secret shared out of band. Deliberately not printable.
class SecretKey {
 public:
  SecretKey() = default;
  explicit SecretKey(const std::array<std::uint8_t, 32>& bytes)
      : bytes_(bytes) {}

  // 64 hex digits, either case. Throws ParameterError otherwise.
  static SecretKey from_hex(std::string_view hex);

  const std::array<std::uint8_t, 32>& bytes() const { return bytes_; }

  friend bool operator==(const SecretKey&, const SecretKey&) = default;

 private:
  std::array<std::uint8_t, 32> bytes_{};
};

// ChaCha20 keystream (20 rounds, all-zero nonce, block counter starting at
// 0). This is the wire-level definition both parties must agree on.
std::vector<std::uint8_t> chacha20_keystream(const SecretKey& key,
                                             std::size_t num_bytes);

// XORs `bits` with the keystream truncated to bits.size(). Keystream byte i
// supplies stream bits 8i..8i+7, most significant bit first.
BitStream keystream_xor(const SecretKey& key, const BitStream& bits);

}  // namespace rankstego::codec
