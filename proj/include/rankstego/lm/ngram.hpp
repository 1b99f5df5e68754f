// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <boost/rational.hpp>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "rankstego/lm/provider.hpp"
#include "rankstego/lm/vocabulary.hpp"

namespace rankstego::lm {

// Add-k smoothing constant, kept exact.
using Smoothing = boost::rational<std::int64_t>;

// Probabilities as numerators over one shared denominator. The numerators
// always sum to the denominator, so normalization holds exactly.
struct ExactDistribution {
  std::vector<std::uint64_t> numerators;
  std::uint64_t denominator = 1;

  boost::rational<std::int64_t> probability(TokenId id) const;
};

// Count-based n-gram model with add-k smoothing and longest-seen-suffix
// backoff. Contexts whose continuation count is zero back off to shorter
// suffixes, ending at the unigram table; an empty corpus gives the uniform
// distribution.
class NgramModel {
 public:
  // Each sentence is counted independently; n-grams never span sentences.
  // Throws ParameterError for order < 1 or negative smoothing, and
  // DegenerateModelError when a non-empty corpus has no sentence of at least
  // `order` tokens.
  static NgramModel train(Vocabulary vocab,
                          std::span<const std::vector<TokenId>> sentences,
                          int order, Smoothing smoothing);

  // One flat token stream, no sentence markers added.
  static NgramModel train_tokens(Vocabulary vocab,
                                 std::span<const TokenId> corpus, int order,
                                 Smoothing smoothing);

  // UTF-8 corpus text: whitespace words, one sentence per non-blank line,
  // each terminated by </s>. The vocabulary is built from the text.
  static NgramModel train_text(std::string_view text, int order,
                               Smoothing smoothing);

  int order() const { return order_; }
  Smoothing smoothing() const { return smoothing_; }
  const Vocabulary& vocabulary() const { return vocab_; }

  // Distribution after the concatenation `history` ++ `context`; only the
  // last order()-1 tokens matter.
  ExactDistribution exact_distribution(std::span<const TokenId> history,
                                       std::span<const TokenId> context) const;

  // Raw count of `token` after `ctx` (ctx.size() < order()).
  std::uint64_t count(std::span<const TokenId> ctx, TokenId token) const;

  // "NGM1" container, see README for the layout.
  void save(std::ostream& out) const;
  static NgramModel load(std::istream& in);

  friend bool operator==(const NgramModel&, const NgramModel&) = default;

 private:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::vector<std::pair<TokenId, std::uint64_t>> next;  // sorted by id

    friend bool operator==(const ContextCounts&,
                           const ContextCounts&) = default;
  };

  NgramModel(Vocabulary vocab, int order, Smoothing smoothing)
      : vocab_(std::move(vocab)), order_(order), smoothing_(smoothing) {}

  Vocabulary vocab_;
  int order_ = 1;
  Smoothing smoothing_{0};
  std::map<std::vector<TokenId>, ContextCounts> counts_;
};

// Provider view of an NgramModel. Temperature is a renormalized power
// transform p^(1/T); at T = 1 every probability is the correctly rounded
// double of its exact rational.
class NgramProvider : public ModelProvider {
 public:
  explicit NgramProvider(std::shared_ptr<const NgramModel> model,
                         double temperature = 1.0,
                         std::size_t max_context = 1u << 20);

  const Vocabulary& vocabulary() const override {
    return model_->vocabulary();
  }
  std::size_t max_context() const override { return max_context_; }
  double temperature() const { return temperature_; }
  const NgramModel& model() const { return *model_; }

 protected:
  Distribution compute(std::span<const TokenId> history,
                       std::span<const TokenId> context) const override;

 private:
  std::shared_ptr<const NgramModel> model_;
  double temperature_;
  std::size_t max_context_;
};

}  // namespace rankstego::lm
