// SPDX-License-Identifier: Apache-2.0

#include "rankstego/codec/beta.hpp"

#include <string>

#include "rankstego/error.hpp"

namespace rankstego::codec {

namespace {

void check_beta(int beta) {
  if (beta < 1 || beta > kMaxBeta) {
    throw ParameterError("beta must be in [1, 16], got " +
                         std::to_string(beta));
  }
}

}  // namespace

BetaSymbols to_beta_symbols(const BitStream& bits, int beta) {
  check_beta(beta);
  BetaSymbols out;
  out.beta = beta;
  const auto width = static_cast<std::size_t>(beta);
  out.symbols.reserve((bits.size() + width - 1) / width);
  for (std::size_t pos = 0; pos < bits.size(); pos += width) {
    std::uint32_t d = 0;
    for (std::size_t i = 0; i < width; ++i) {
      const bool bit = pos + i < bits.size() && bits[pos + i];
      d = (d << 1) | (bit ? 1u : 0u);
    }
    out.symbols.push_back(d);
  }
  return out;
}

BitStream from_beta_symbols(const BetaSymbols& symbols) {
  check_beta(symbols.beta);
  BitStream out;
  for (std::uint32_t d : symbols.symbols) {
    if ((d >> symbols.beta) != 0) {
      throw RangeError("symbol " + std::to_string(d) + " does not fit in " +
                       std::to_string(symbols.beta) + " bits");
    }
    out.append_bits(d, static_cast<unsigned>(symbols.beta));
  }
  return out;
}

}  // namespace rankstego::codec
