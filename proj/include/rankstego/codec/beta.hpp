// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "rankstego/codec/bitstream.hpp"

namespace rankstego::codec {

inline constexpr int kMaxBeta = 16;

struct BetaSymbols {
  std::vector<std::uint32_t> symbols;  // each < 2^beta
  int beta = 1;

  friend bool operator==(const BetaSymbols&, const BetaSymbols&) = default;
};

// Big-endian beta-bit chunks; the last chunk is zero-padded on the right.
// Requires 1 <= beta <= 16.
BetaSymbols to_beta_symbols(const BitStream& bits, int beta);

// Concatenates each symbol in beta bits. Throws RangeError for a symbol that
// does not fit.
BitStream from_beta_symbols(const BetaSymbols& symbols);

}  // namespace rankstego::codec
