// SPDX-License-Identifier: Apache-2.0

#include "rankstego/lm/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rankstego/error.hpp"

namespace rankstego::lm {

std::vector<TokenId> canonical_order(std::span<const double> probs) {
  std::vector<TokenId> order(probs.size());
  std::iota(order.begin(), order.end(), TokenId{0});
  std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  return order;
}

bool is_canonical_order(std::span<const double> probs,
                        std::span<const TokenId> order) {
  if (order.size() != probs.size()) return false;
  std::vector<bool> seen(probs.size(), false);
  for (TokenId id : order) {
    if (id >= probs.size() || seen[id]) return false;
    seen[id] = true;
  }
  for (std::size_t i = 1; i < order.size(); ++i) {
    const double prev = probs[order[i - 1]];
    const double cur = probs[order[i]];
    if (prev < cur) return false;
    if (prev == cur && order[i - 1] > order[i]) return false;
  }
  return true;
}

double stable_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

Distribution::Distribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty()) throw ValidationError("empty distribution");
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("distribution entry is negative or not finite");
    }
  }
  order_ = canonical_order(probs_);
  rank_.resize(order_.size());
  for (std::size_t r = 0; r < order_.size(); ++r) {
    rank_[order_[r]] = static_cast<std::uint32_t>(r);
  }
}

double Distribution::prob(TokenId id) const {
  if (id >= probs_.size()) {
    throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return probs_[id];
}

TokenId Distribution::at_rank(std::size_t rank) const {
  if (rank >= order_.size()) {
    throw RangeError("rank " + std::to_string(rank) + " outside vocabulary of " +
                     std::to_string(order_.size()));
  }
  return order_[rank];
}

std::size_t Distribution::rank_of(TokenId id) const {
  if (id >= rank_.size()) {
    throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return rank_[id];
}

Distribution Distribution::without(TokenId id) const {
  if (id >= probs_.size()) {
    throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
  }
  std::vector<double> masked = probs_;
  masked[id] = 0.0;
  const double total = stable_sum(masked);
  if (!(total > 0.0)) {
    throw ValidationError("no probability mass left after masking");
  }
  for (double& p : masked) p /= total;
  return Distribution(std::move(masked));
}

}  // namespace rankstego::lm
