// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rankstego/lm/vocabulary.hpp"

namespace rankstego::lm {

// Next-token probabilities plus the canonical rank order: descending
// probability, ties broken by ascending token id. Both sides of a stego
// session must derive identical orders, so the order is always recomputed
// from the probabilities and never taken from outside.
class Distribution {
 public:
  // Throws ValidationError on empty input, NaN, or negative entries.
  // Normalization is the provider's responsibility and is not checked here.
  explicit Distribution(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  std::span<const double> probs() const { return probs_; }
  std::span<const TokenId> order() const { return order_; }

  double prob(TokenId id) const;
  TokenId at_rank(std::size_t rank) const;
  std::size_t rank_of(TokenId id) const;

  // Zeroes `id` and renormalizes the rest. Used to keep </s> out of the
  // stego channel.
  Distribution without(TokenId id) const;

  friend bool operator==(const Distribution& a, const Distribution& b) {
    return a.probs_ == b.probs_ && a.order_ == b.order_;
  }

 private:
  std::vector<double> probs_;
  std::vector<TokenId> order_;
  std::vector<std::uint32_t> rank_;
};

std::vector<TokenId> canonical_order(std::span<const double> probs);

// Checks that `order` is a permutation sorted by (prob desc, id asc).
bool is_canonical_order(std::span<const double> probs,
                        std::span<const TokenId> order);

// Compensated (Neumaier) sum in index order.
double stable_sum(std::span<const double> values);

}  // namespace rankstego::lm
