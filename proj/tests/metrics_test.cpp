// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "rankstego/error.hpp"
#include "rankstego/lm/ngram.hpp"
#include "rankstego/metrics.hpp"
#include "rankstego/stego/stego.hpp"
#include "test_support.hpp"

using namespace rankstego;
using namespace rankstego::metrics;
using rankstego::lm::NgramModel;
using rankstego::lm::NgramProvider;

TEST_CASE("payload capacity") {
  CHECK(payload_capacity("0123456789", std::string(100, 'x')) == 10.0);
  CHECK(payload_capacity("abcde", "vwxyz") == 100.0);
  CHECK(payload_capacity("café", "naïve text") == 40.0);
  CHECK_THROWS_AS(payload_capacity("a", ""), ParameterError);

  const std::string m = "secret words", s = "the council openly predicted";
  CHECK(payload_capacity(m + m, s + s) == payload_capacity(m, s));
}

TEST_CASE("perplexity known answers") {
  SUBCASE("dyadic two-token case") {
    const auto p = testing::TableProvider(testing::numbered_vocab(4),
                                          {0.5, 0.125, 0.125, 0.25});
    const std::vector<TokenId> t{0, 1};
    CHECK(perplexity(p, t, {}) == 4.0);
  }
  SUBCASE("certain model") {
    const auto p = testing::TableProvider(testing::numbered_vocab(3),
                                          {0.0, 0.0, 1.0});
    const std::vector<TokenId> t{2, 2, 2};
    CHECK(perplexity(p, t, {}) == 1.0);
    const std::vector<TokenId> impossible{2, 0};
    CHECK(std::isinf(perplexity(p, impossible, {})));
  }
  SUBCASE("uniform model") {
    for (std::size_t n : {2u, 4u, 16u, 64u, 100u, 207u, 1000u}) {
      const auto p = testing::uniform_provider(n);
      const std::vector<TokenId> t{1, 0, 1, 1, 0};
      CHECK(perplexity(p, t, {}) == static_cast<double>(n));
    }
  }
  CHECK_THROWS_AS(perplexity(testing::uniform_provider(4), {}, {}),
                  ParameterError);
}

TEST_CASE("window perplexity on a hand-computed bigram") {
  // Bigram over "a b a b" with k = 1: P(a) = 3/8, P(b|a) = 1/2, P(a|b) = 2/5.
  const std::vector<std::string> words{"a", "b"};
  const std::vector<TokenId> corpus{2, 3, 2, 3};
  NgramProvider p(std::make_shared<NgramModel>(NgramModel::train_tokens(
      lm::Vocabulary::from_words(words), corpus, 2, 1)));
  const std::vector<TokenId> gen{2, 3, 2};
  const double expected = std::cbrt(40.0 / 3.0);
  CHECK(ppl_window(p, {}, gen) == doctest::Approx(expected).epsilon(1e-14));

  // Only the last context token and the first generated tokens count.
  const std::vector<TokenId> ctx{1, 1, 1, 3};
  const std::vector<TokenId> one{2};
  CHECK(ppl_window(p, ctx, one, 1) ==
        doctest::Approx(5.0 / 2.0).epsilon(1e-14));
  const std::vector<TokenId> ten_ctx(12, 2);
  const std::vector<TokenId> long_gen{3, 2, 3, 2, 3, 2, 3, 2, 3, 2, 0, 0};
  CHECK(ppl_window(p, ten_ctx, long_gen) ==
        perplexity(p, std::span(long_gen).first(10),
                   std::span(ten_ctx).last(10)));
}

TEST_CASE("perplexity of a greedy continuation") {
  NgramProvider p(testing::reference_model());
  const auto ctx = p.vocabulary().tokenize("the council");
  std::vector<TokenId> gen;
  long double log_sum = 0.0L;
  for (int i = 0; i < 8; ++i) {
    const auto d = p.next_distribution(gen, ctx);
    const TokenId t = d.at_rank(0);
    log_sum += std::log(static_cast<long double>(d.prob(t)));
    gen.push_back(t);
  }
  const double geo = static_cast<double>(std::exp(-log_sum / 8));
  CHECK(perplexity(p, gen, ctx) == doctest::Approx(geo).epsilon(1e-12));
}

TEST_CASE("sweep grid shape, degenerate cells and report format") {
  NgramProvider p(testing::reference_model(), 0.7);
  const auto& vocab = p.vocabulary();
  stego::StegoConfig base;
  base.private_context = vocab.tokenize("this is an emergency broadcast :");
  base.stego_context = vocab.tokenize("the agency said");
  std::vector<std::vector<TokenId>> calib{
      vocab.tokenize("the museum finally criticized the schedule .")};
  const auto cb = stego::calibrate_codebook(p, calib, base.private_context);
  const std::vector<std::string> msgs{"the council said", "local officials ."};

  SUBCASE("1x1 grid") {
    const std::vector<double> alphas{0.6};
    const std::vector<int> betas{3};
    const auto cells = sweep(p, p, cb, base, alphas, betas, msgs);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].ok == 2);
    REQUIRE(cells[0].mean.has_value());
    stego::StegoConfig c = base;
    const EvalReport r0 = evaluate(p, p, cb, c, msgs[0]);
    const EvalReport r1 = evaluate(p, p, cb, c, msgs[1]);
    CHECK(cells[0].mean->payload_pct ==
          doctest::Approx((r0.payload_pct + r1.payload_pct) / 2));
    CHECK(r0.ppl >= 1.0);
    CHECK(r0.embed_seconds >= 0.0);
    CHECK(r0.extract_seconds >= 0.0);
  }
  SUBCASE("grid order and thread independence") {
    const std::vector<double> alphas{0.4, 0.8};
    const std::vector<int> betas{1, 2};
    const SweepOptions serial{1, "reference", false};
    const SweepOptions parallel{3, "reference", false};
    const auto a = sweep(p, p, cb, base, alphas, betas, msgs, serial);
    const auto b = sweep(p, p, cb, base, alphas, betas, msgs, parallel);
    REQUIRE(a.size() == 4);
    CHECK(a[1].alpha == 0.4);
    CHECK(a[1].beta == 2);
    CHECK(a[2].alpha == 0.8);
    std::ostringstream ja, jb;
    write_jsonl(ja, a, serial);
    write_jsonl(jb, b, parallel);
    CHECK(ja.str() == jb.str());
    CHECK(ja.str().find(R"("schema":"eval-v1")") != std::string::npos);
    CHECK(ja.str().find("embed_seconds") == std::string::npos);
  }
  SUBCASE("always-closed gate") {
    const auto peaked = testing::peaked_provider(16);
    stego::StegoConfig c;
    c.max_tokens = 40;
    std::vector<std::vector<TokenId>> cal{{2, 3}};
    const auto pcb = stego::calibrate_codebook(peaked, cal, {}, 16);
    const std::vector<double> alphas{0.4, 0.8};
    const std::vector<int> betas{1, 3};
    const std::vector<std::string> m{"w0 w1", "w3"};
    for (const auto& cell : sweep(peaked, peaked, pcb, c, alphas, betas, m)) {
      CHECK(cell.capacity_exhausted == 2);
      CHECK(cell.ok == 0);
      CHECK_FALSE(cell.mean.has_value());
    }
  }
}
