// SPDX-License-Identifier: Apache-2.0

#include "rankstego/lm/provider.hpp"

#include <string>

#include "rankstego/error.hpp"

namespace rankstego::lm {

Distribution ModelProvider::next_distribution(
    std::span<const TokenId> context, std::span<const TokenId> history) const {
  const std::size_t vocab = vocabulary().size();
  for (auto seq : {history, context}) {
    for (TokenId id : seq) {
      if (id >= vocab) {
        throw RangeError("token id " + std::to_string(id) +
                         " outside vocabulary of " + std::to_string(vocab));
      }
    }
  }
  if (history.size() + context.size() > max_context()) {
    throw ContextOverflowError("context of " +
                               std::to_string(history.size() + context.size()) +
                               " tokens exceeds provider limit of " +
                               std::to_string(max_context()));
  }
  Distribution d = compute(history, context);
  if (d.size() != vocab) {
    throw ValidationError("provider returned " + std::to_string(d.size()) +
                          " probabilities for a vocabulary of " +
                          std::to_string(vocab));
  }
  return d;
}

}  // namespace rankstego::lm
