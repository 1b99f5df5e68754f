// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <sstream>

#include "rankstego/error.hpp"
#include "rankstego/lm/ngram.hpp"
#include "test_support.hpp"

using namespace rankstego;
using namespace rankstego::lm;
using rankstego::testing::numbered_vocab;
using rankstego::testing::reference_model;

namespace {

using Q = boost::rational<std::int64_t>;

Vocabulary ab_vocab() {
  const std::vector<std::string> words{"a", "b"};
  return Vocabulary::from_words(words);  // </s>=0 <unk>=1 a=2 b=3
}

std::vector<TokenId> ids(const Vocabulary& v, std::string_view text) {
  return v.tokenize(text);
}

}  // namespace

TEST_CASE("vocabulary layout and tokenization") {
  const Vocabulary v = ab_vocab();
  CHECK(v.size() == 4);
  CHECK(v.eos() == 0);
  CHECK(v.unk() == TokenId{1});
  CHECK(v.find("b") == TokenId{3});

  std::size_t unknown = 0;
  CHECK(v.tokenize("  a\tb\n zz ", &unknown) == std::vector<TokenId>{2, 3, 1});
  CHECK(unknown == 1);
  CHECK(v.detokenize(std::vector<TokenId>{2, 3, 0}) == "a b </s>");

  CHECK_THROWS_AS(Vocabulary({"a", "a", "</s>"}), ParameterError);
  CHECK_THROWS_AS(Vocabulary({"a", "b"}), ParameterError);  // no </s>
  const Vocabulary no_unk({"</s>", "x"});
  CHECK_THROWS_AS(no_unk.tokenize("y"), ParameterError);
}

TEST_CASE("distribution order is descending with id tie-break") {
  const Distribution d({0.1, 0.3, 0.3, 0.2, 0.1});
  CHECK(std::vector<TokenId>(d.order().begin(), d.order().end()) ==
        std::vector<TokenId>{1, 2, 3, 0, 4});
  CHECK(is_canonical_order(d.probs(), d.order()));
  CHECK(canonical_order(d.probs()) ==
        std::vector<TokenId>(d.order().begin(), d.order().end()));
  CHECK(d.rank_of(3) == 2);
  CHECK(d.at_rank(4) == 4);
  CHECK_THROWS_AS(d.at_rank(5), RangeError);

  const Distribution masked = d.without(1);
  CHECK(masked.prob(1) == 0.0);
  CHECK(masked.at_rank(0) == 2);
  CHECK(masked.prob(2) == doctest::Approx(0.3 / 0.7));

  CHECK_THROWS_AS(Distribution({0.5, -0.1}), ValidationError);
  CHECK_THROWS_AS(Distribution(std::vector<double>{}), ValidationError);
}

TEST_CASE("order property holds for random probability vectors") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> bucket(0, 5);  // coarse, to force ties
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(1 + trial % 40);
    for (double& x : p) x = bucket(rng) / 5.0;
    p[0] += 0.01;
    const Distribution d(p);
    CHECK(is_canonical_order(d.probs(), d.order()));
    const Distribution again(std::vector<double>(d.probs().begin(), d.probs().end()));
    CHECK(again == d);
  }
}

TEST_CASE("unigram model on 'a a a b'") {
  const std::vector<TokenId> corpus{2, 2, 2, 3};

  SUBCASE("without smoothing") {
    const NgramModel m = NgramModel::train_tokens(ab_vocab(), corpus, 1, 0);
    const ExactDistribution d = m.exact_distribution({}, {});
    CHECK(d.probability(2) == Q(3, 4));
    CHECK(d.probability(3) == Q(1, 4));
    CHECK(d.probability(0) == Q(0));
  }
  SUBCASE("add-one smoothing") {
    const NgramModel m = NgramModel::train_tokens(ab_vocab(), corpus, 1, 1);
    const ExactDistribution d = m.exact_distribution({}, {});
    // (3+1)/(4+4), (1+1)/8, 1/8, 1/8
    CHECK(d.probability(2) == Q(1, 2));
    CHECK(d.probability(3) == Q(1, 4));
    CHECK(d.probability(0) == Q(1, 8));
    CHECK(d.probability(1) == Q(1, 8));

    NgramProvider p(std::make_shared<NgramModel>(m));
    const Distribution dist = p.next_distribution({}, {});
    CHECK(std::vector<TokenId>(dist.order().begin(), dist.order().end()) ==
          std::vector<TokenId>{2, 3, 0, 1});
    CHECK(dist.prob(2) == 0.5);
  }
}

TEST_CASE("bigram model on 'a b a b'") {
  const std::vector<TokenId> corpus{2, 3, 2, 3};
  const NgramModel m = NgramModel::train_tokens(ab_vocab(), corpus, 2, 0);
  const std::vector<TokenId> a{2}, b{3};
  CHECK(m.exact_distribution({}, a).probability(3) == Q(1));
  CHECK(m.exact_distribution({}, b).probability(2) == Q(1));
  CHECK(m.count(a, 3) == 2);
  CHECK(m.count(b, 2) == 1);
  // history and context concatenate; only the last token matters
  CHECK(m.exact_distribution(a, b).probability(2) == Q(1));
}

TEST_CASE("empty corpus gives the uniform model") {
  for (int order : {1, 2, 5}) {
    const NgramModel m =
        NgramModel::train_tokens(numbered_vocab(4), {}, order, 0);
    NgramProvider p(std::make_shared<NgramModel>(m));
    const std::vector<TokenId> ctx{3, 2};
    const Distribution d = p.next_distribution(ctx, {});
    CHECK(std::vector<double>(d.probs().begin(), d.probs().end()) ==
          std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK(std::vector<TokenId>(d.order().begin(), d.order().end()) ==
          std::vector<TokenId>{0, 1, 2, 3});
  }
  const NgramModel from_text = NgramModel::train_text("", 2, 0);
  CHECK(from_text.vocabulary().size() == 2);
}

TEST_CASE("training errors") {
  const std::vector<TokenId> corpus{2, 3};
  CHECK_THROWS_AS(NgramModel::train_tokens(ab_vocab(), corpus, 3, 0),
                  DegenerateModelError);
  CHECK_THROWS_AS(NgramModel::train_tokens(ab_vocab(), corpus, 0, 0),
                  ParameterError);
  CHECK_THROWS_AS(NgramModel::train_tokens(ab_vocab(), corpus, 1, -1),
                  ParameterError);
  const std::vector<TokenId> bad{2, 9};
  CHECK_THROWS_AS(NgramModel::train_tokens(ab_vocab(), bad, 1, 0), RangeError);
}

TEST_CASE("unseen contexts back off to shorter suffixes") {
  const NgramModel m = NgramModel::train_text("a b c\n", 3, 0);
  const Vocabulary& v = m.vocabulary();
  // "c a" never occurs, "a" does: P(b | c a) = P(b | a) = 1
  const auto ctx = ids(v, "c a");
  CHECK(m.exact_distribution({}, ctx).probability(*v.find("b")) == Q(1));
  // "c" is only ever followed by </s>
  const auto ctx2 = ids(v, "c");
  CHECK(m.exact_distribution({}, ctx2).probability(v.eos()) == Q(1));
  const auto ctx3 = ids(v, "<unk>");
  CHECK(m.exact_distribution({}, ctx3).probability(*v.find("a")) ==
        Q(1, 4));
}

TEST_CASE("reference model distributions are exactly normalized") {
  const auto model = reference_model();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<TokenId> tok(0, model->vocabulary().size() - 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenId> hist(trial % 4), ctx(trial % 3);
    for (auto& t : hist) t = tok(rng);
    for (auto& t : ctx) t = tok(rng);
    const ExactDistribution d = model->exact_distribution(hist, ctx);
    std::uint64_t sum = 0;
    for (auto n : d.numerators) sum += n;
    CHECK(sum == d.denominator);
  }
}

TEST_CASE("independent providers from the same corpus are bit-identical") {
  const std::string text =
      rankstego::testing::read_text(rankstego::testing::corpus_path());
  NgramProvider p1(std::make_shared<NgramModel>(
                       NgramModel::train_text(text, 3, Smoothing(1, 10))),
                   0.7);
  NgramProvider p2(std::make_shared<NgramModel>(
                       NgramModel::train_text(text, 3, Smoothing(1, 10))),
                   0.7);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<TokenId> tok(0, p1.vocabulary().size() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenId> hist(rng() % 6), ctx(rng() % 6);
    for (auto& t : hist) t = tok(rng);
    for (auto& t : ctx) t = tok(rng);
    const Distribution a = p1.next_distribution(ctx, hist);
    const Distribution b = p2.next_distribution(ctx, hist);
    CHECK(a == b);
    CHECK(is_canonical_order(a.probs(), a.order()));
    CHECK(std::fabs(stable_sum(a.probs()) - 1.0) <= 0x1p-40);
  }
}

TEST_CASE("temperature sharpens without changing the order") {
  const auto model = reference_model();
  NgramProvider cold(model, 0.7), plain(model, 1.0);
  const auto ctx = model->vocabulary().tokenize("the weather");
  const Distribution a = cold.next_distribution(ctx, {});
  const Distribution b = plain.next_distribution(ctx, {});
  CHECK(std::equal(a.order().begin(), a.order().end(), b.order().begin()));
  CHECK(a.prob(a.at_rank(0)) > b.prob(b.at_rank(0)));
  CHECK_THROWS_AS(NgramProvider(model, 0.0), ParameterError);
}

TEST_CASE("provider validates ids and context length") {
  NgramProvider p(reference_model(), 1.0, 4);
  const std::vector<TokenId> bad{9999};
  CHECK_THROWS_AS(p.next_distribution(bad, {}), RangeError);
  const std::vector<TokenId> five{2, 2, 2, 2, 2};
  CHECK_THROWS_AS(p.next_distribution(five, {}), ContextOverflowError);
  const std::vector<TokenId> two{2, 2};
  CHECK_THROWS_AS(p.next_distribution(two, five), ContextOverflowError);
  CHECK_NOTHROW(p.next_distribution(two, two));
}

TEST_CASE("model file round-trips exactly") {
  const auto& model = *reference_model();
  std::stringstream buf;
  model.save(buf);
  const std::string bytes = buf.str();
  CHECK(bytes.substr(0, 4) == "NGM1");

  std::istringstream in(bytes);
  const NgramModel loaded = NgramModel::load(in);
  CHECK(loaded == model);
  std::stringstream again;
  loaded.save(again);
  CHECK(again.str() == bytes);

  NgramProvider a(std::make_shared<NgramModel>(loaded)), b(reference_model());
  const auto ctx = model.vocabulary().tokenize("the council");
  CHECK(a.next_distribution(ctx, {}) == b.next_distribution(ctx, {}));

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(NgramModel::load(truncated), FormatError);
  std::istringstream wrong("XXXX");
  CHECK_THROWS_AS(NgramModel::load(wrong), FormatError);
}
