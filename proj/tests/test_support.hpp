// SPDX-License-Identifier: Apache-2.0

// Fixed-distribution providers and helpers shared by the test binaries.

#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rankstego/lm/ngram.hpp"
#include "rankstego/lm/provider.hpp"

namespace rankstego::testing {

using lm::Distribution;
using lm::TokenId;
using lm::Vocabulary;

// Vocabulary of </s>, <unk>, then w0..w{n-3}.
inline Vocabulary numbered_vocab(std::size_t n) {
  std::vector<std::string> s{"</s>", "<unk>"};
  for (std::size_t i = 2; i < n; ++i) s.push_back("w" + std::to_string(i - 2));
  return Vocabulary(std::move(s));
}

// Returns the same probabilities for every context.
class TableProvider : public lm::ModelProvider {
 public:
  TableProvider(Vocabulary vocab, std::vector<double> probs)
      : vocab_(std::move(vocab)), probs_(std::move(probs)) {}

  const Vocabulary& vocabulary() const override { return vocab_; }

 protected:
  Distribution compute(std::span<const TokenId>,
                       std::span<const TokenId>) const override {
    return Distribution(probs_);
  }

 private:
  Vocabulary vocab_;
  std::vector<double> probs_;
};

inline TableProvider uniform_provider(std::size_t n) {
  return TableProvider(numbered_vocab(n),
                       std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// Nearly all mass on one non-</s> token, so every gate stays closed.
inline TableProvider peaked_provider(std::size_t n) {
  std::vector<double> p(n, 1e-9);
  p[2] = 1.0 - 1e-9 * static_cast<double>(n - 1);
  return TableProvider(numbered_vocab(n), std::move(p));
}

inline std::string corpus_path() { return RANKSTEGO_CORPUS_PATH; }

std::string read_text(const std::string& path);

// The reference model used across integration tests: order 3, k = 1/10,
// trained on data/corpus.txt.
std::shared_ptr<const lm::NgramModel> reference_model();

// Random message of in-vocabulary words (no specials), between 1 and
// max_bytes bytes long.
std::string random_message(const Vocabulary& vocab, std::mt19937_64& rng,
                           std::size_t max_bytes);

}  // namespace rankstego::testing
