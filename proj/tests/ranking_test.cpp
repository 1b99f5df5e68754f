// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "rankstego/error.hpp"
#include "rankstego/lm/ngram.hpp"
#include "rankstego/ranking.hpp"
#include "test_support.hpp"

using namespace rankstego;
using namespace rankstego::ranking;
using rankstego::lm::NgramModel;
using rankstego::lm::NgramProvider;
using rankstego::lm::TokenId;

namespace {

NgramProvider abab_bigram() {
  const std::vector<std::string> words{"a", "b"};
  const std::vector<TokenId> corpus{2, 3, 2, 3};
  return NgramProvider(std::make_shared<NgramModel>(NgramModel::train_tokens(
      lm::Vocabulary::from_words(words), corpus, 2, 1)));
}

}  // namespace

TEST_CASE("token and rank lookups on a fixed table") {
  const auto p = testing::TableProvider(testing::numbered_vocab(4),
                                        {0.4, 0.3, 0.2, 0.1});
  CHECK(token_to_rank(p, {}, 2, {}) == 2);
  CHECK(rank_to_token(p, {}, 1, {}) == 1);
  CHECK_THROWS_AS(rank_to_token(p, {}, 4, {}), RangeError);
}

TEST_CASE("compressing 'a b' under the a-b bigram") {
  const NgramProvider p = abab_bigram();
  const std::vector<TokenId> msg{2, 3};
  CHECK(compress_message(p, msg, {}) == RankSequence{0, 0, 1});

  const RankSequence ranks{0, 0, 1};
  const Decompressed d = decompress_ranks(p, ranks, {});
  CHECK(d.tokens == msg);
  CHECK(d.terminated);
  CHECK(d.consumed == 3);

  CHECK_THROWS_AS(compress_message(p, {}, {}), ParameterError);
}

TEST_CASE("ranks after the end marker are ignored") {
  const NgramProvider p = abab_bigram();
  const RankSequence ranks{0, 0, 1, 3, 2, 0};
  const Decompressed d = decompress_ranks(p, ranks, {});
  CHECK(d.tokens == std::vector<TokenId>{2, 3});
  CHECK(d.consumed == 3);

  const RankSequence unterminated{0, 0};
  const Decompressed u = decompress_ranks(p, unterminated, {});
  CHECK_FALSE(u.terminated);
  CHECK(u.tokens == std::vector<TokenId>{2, 3});
}

TEST_CASE("random messages round-trip through ranks") {
  NgramProvider p(testing::reference_model(), 0.7);
  const auto& vocab = p.vocabulary();
  const auto hp = vocab.tokenize("this is an emergency broadcast :");
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto msg = vocab.tokenize(testing::random_message(vocab, rng, 80));
    const RankSequence ranks = compress_message(p, msg, hp);
    REQUIRE(ranks.size() == msg.size() + 1);
    const Decompressed d = decompress_ranks(p, ranks, hp);
    CHECK(d.terminated);
    CHECK(d.tokens == msg);
  }
}

TEST_CASE("rank histogram counts every rank including the end marker") {
  const NgramProvider p = abab_bigram();
  const std::vector<std::vector<TokenId>> msgs{{2, 3}, {2}};
  // "a" alone: rank 0, then </s> after a: 1/6 ties, </s> id 0 -> rank 1
  const RankHistogram h = rank_histogram(p, msgs, {});
  CHECK(h == RankHistogram{{0, 3}, {1, 2}});
}
