// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <span>

#include "rankstego/lm/distribution.hpp"
#include "rankstego/lm/vocabulary.hpp"

namespace rankstego::lm {

// Source of next-token distributions.
//
// Implementations must be deterministic and stateless between calls:
// identical (history, context) arguments yield bit-identical distributions.
// Const methods may be called concurrently.
class ModelProvider {
 public:
  virtual ~ModelProvider() = default;

  virtual const Vocabulary& vocabulary() const = 0;

  // Longest history + context the provider accepts.
  virtual std::size_t max_context() const {
    return std::numeric_limits<std::size_t>::max();
  }

  // Distribution of the token following `history` ++ `context`. `history` is
  // the conditioning prompt (private or stego context), `context` the tokens
  // produced so far. Validates ids and length before delegating.
  Distribution next_distribution(std::span<const TokenId> context,
                                 std::span<const TokenId> history) const;

 protected:
  virtual Distribution compute(std::span<const TokenId> history,
                               std::span<const TokenId> context) const = 0;
};

}  // namespace rankstego::lm
