// SPDX-License-Identifier: Apache-2.0

#include "rankstego/ranking.hpp"

#include "rankstego/error.hpp"

namespace rankstego::ranking {

Rank token_to_rank(const ModelProvider& provider,
                   std::span<const TokenId> prefix, TokenId token,
                   std::span<const TokenId> private_context) {
  const lm::Distribution d =
      provider.next_distribution(prefix, private_context);
  return static_cast<Rank>(d.rank_of(token));
}

TokenId rank_to_token(const ModelProvider& provider,
                      std::span<const TokenId> prefix, Rank rank,
                      std::span<const TokenId> private_context) {
  const lm::Distribution d =
      provider.next_distribution(prefix, private_context);
  return d.at_rank(rank);
}

RankSequence compress_message(const ModelProvider& provider,
                              std::span<const TokenId> message,
                              std::span<const TokenId> private_context) {
  if (message.empty()) throw ParameterError("cannot compress empty message");
  RankSequence ranks;
  ranks.reserve(message.size() + 1);
  const TokenId eos = provider.vocabulary().eos();
  for (std::size_t t = 0; t <= message.size(); ++t) {
    const TokenId target = t < message.size() ? message[t] : eos;
    ranks.push_back(
        token_to_rank(provider, message.first(t), target, private_context));
  }
  return ranks;
}

Decompressed decompress_ranks(const ModelProvider& provider,
                              std::span<const Rank> ranks,
                              std::span<const TokenId> private_context) {
  Decompressed out;
  const TokenId eos = provider.vocabulary().eos();
  for (Rank r : ranks) {
    const TokenId tok = rank_to_token(provider, out.tokens, r, private_context);
    ++out.consumed;
    if (tok == eos) {
      out.terminated = true;
      break;
    }
    out.tokens.push_back(tok);
  }
  return out;
}

RankHistogram rank_histogram(const ModelProvider& provider,
                             std::span<const std::vector<TokenId>> messages,
                             std::span<const TokenId> private_context) {
  RankHistogram hist;
  for (const auto& m : messages) {
    if (m.empty()) continue;
    for (Rank r : compress_message(provider, m, private_context)) ++hist[r];
  }
  return hist;
}

}  // namespace rankstego::ranking
