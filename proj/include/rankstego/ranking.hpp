// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "rankstego/lm/provider.hpp"

namespace rankstego::ranking {

using lm::ModelProvider;
using lm::TokenId;

// 0-based position in a Distribution's canonical order.
using Rank = std::uint32_t;
using RankSequence = std::vector<Rank>;
using RankHistogram = std::map<Rank, std::uint64_t>;

Rank token_to_rank(const ModelProvider& provider,
                   std::span<const TokenId> prefix, TokenId token,
                   std::span<const TokenId> private_context);

// Throws RangeError for rank >= |V|.
TokenId rank_to_token(const ModelProvider& provider,
                      std::span<const TokenId> prefix, Rank rank,
                      std::span<const TokenId> private_context);

// Ranks of `message` followed by </s>, each conditioned on the private
// context and the preceding message tokens. Output length is
// message.size() + 1. Throws ParameterError on an empty message.
RankSequence compress_message(const ModelProvider& provider,
                              std::span<const TokenId> message,
                              std::span<const TokenId> private_context);

struct Decompressed {
  std::vector<TokenId> tokens;  // </s> excluded
  bool terminated = false;      // true when </s> was reconstructed
  std::size_t consumed = 0;     // ranks read, including the </s> rank
};

// Inverse of compress_message. Stops at the first reconstructed </s>; any
// ranks after it are codec padding and are ignored.
Decompressed decompress_ranks(const ModelProvider& provider,
                              std::span<const Rank> ranks,
                              std::span<const TokenId> private_context);

// Rank frequencies of compress_message over a set of messages.
RankHistogram rank_histogram(const ModelProvider& provider,
                             std::span<const std::vector<TokenId>> messages,
                             std::span<const TokenId> private_context);

}  // namespace rankstego::ranking
