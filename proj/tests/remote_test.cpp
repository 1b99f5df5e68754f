// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <random>

#include "rankstego/error.hpp"
#include "rankstego/lm/ngram.hpp"
#include "rankstego/lm/remote.hpp"
#include "test_support.hpp"

using namespace rankstego;
using namespace rankstego::lm;

namespace {

std::vector<TokenId> head(const Distribution& d, std::size_t n) {
  return {d.order().begin(), d.order().begin() + n};
}

}  // namespace

TEST_CASE("decoded responses are ordered locally") {
  const Distribution d = decode_response(
      R"({"probs":[{"id":7,"p":0.5},{"id":2,"p":0.3},{"id":9,"p":0.2}],"tail_mass":0.0})",
      10);
  CHECK(head(d, 3) == std::vector<TokenId>{7, 2, 9});

  const Distribution tie = decode_response(
      R"({"probs":[{"id":9,"p":0.5},{"id":2,"p":0.5}],"tail_mass":0.0})", 10);
  CHECK(head(tie, 2) == std::vector<TokenId>{2, 9});
}

TEST_CASE("tail mass is spread over unlisted ids") {
  const Distribution d = decode_response(
      R"({"probs":[{"id":1,"p":0.5}],"tail_mass":0.5})", 3);
  CHECK(d.prob(1) == 0.5);
  CHECK(d.prob(0) == 0.25);
  CHECK(d.prob(2) == 0.25);
  CHECK(head(d, 3) == std::vector<TokenId>{1, 0, 2});
}

TEST_CASE("malformed responses are rejected") {
  CHECK_THROWS_AS(
      decode_response(
          R"({"probs":[{"id":0,"p":0.5},{"id":1,"p":0.43}]})", 2),
      ValidationError);
  CHECK_THROWS_AS(decode_response("not json", 2), ProtocolError);
  CHECK_THROWS_AS(decode_response(R"({"probs":[{"id":5,"p":1.0}]})", 2),
                  ProtocolError);
  CHECK_THROWS_AS(
      decode_response(R"({"probs":[{"id":0,"p":0.5},{"id":0,"p":0.5}]})", 2),
      ProtocolError);
  CHECK_THROWS_AS(decode_response(R"({"probs":[{"id":0,"p":1.0}]})", 3),
                  ProtocolError);  // partial listing without tail_mass
  CHECK_THROWS_AS(
      decode_response(R"({"probs":[{"id":0,"p":1.5},{"id":1,"p":-0.5}]})", 2),
      ValidationError);
  CHECK_THROWS_AS(
      decode_response(R"({"probs":[{"id":0,"p":1.0}],"tail_mass":0.0})", 40,
                      17),
      ValidationError);
}

TEST_CASE("mass tolerance is 2^-40") {
  const auto body = [](double p0) {
    char num[32];
    std::snprintf(num, sizeof num, "%.17g", p0);
    return R"({"probs":[{"id":0,"p":)" + std::string(num) +
           R"(},{"id":1,"p":0.5}]})";
  };
  CHECK_NOTHROW(decode_response(body(0.5), 2));
  CHECK_THROWS_AS(decode_response(body(0.5 + 1e-9), 2), ValidationError);
}

TEST_CASE("request encoding round-trips") {
  const DistributionRequest r{{4, 0, 17}, 0.7};
  const DistributionRequest back = decode_request(encode_request(r));
  CHECK(back.context == r.context);
  CHECK(back.temperature == 0.7);
  CHECK_THROWS_AS(decode_request("{}"), ProtocolError);
}

TEST_CASE("response encoding round-trips full and partial listings") {
  const auto model = testing::reference_model();
  NgramProvider local(model);
  const auto ctx = model->vocabulary().tokenize("the council");
  const Distribution d = local.next_distribution(ctx, {});
  CHECK(decode_response(encode_response(d), d.size()) == d);

  const Distribution partial = decode_response(encode_response(d, 20), d.size(), 17);
  CHECK(head(partial, 20) == head(d, 20));
}

TEST_CASE("remote provider matches the local model through a server") {
  const auto model = testing::reference_model();
  NgramProvider local(model);
  DistributionServer server(local);
  const int port = server.start();
  RemoteProvider remote("http://127.0.0.1:" + std::to_string(port),
                        model->vocabulary(), 1.0);

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<TokenId> tok(0, model->vocabulary().size() - 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TokenId> hist(rng() % 4), ctx(rng() % 4);
    for (auto& t : hist) t = tok(rng);
    for (auto& t : ctx) t = tok(rng);
    const Distribution a = local.next_distribution(ctx, hist);
    const Distribution b = remote.next_distribution(ctx, hist);
    CHECK(std::equal(a.order().begin(), a.order().end(), b.order().begin()));
    CHECK(a == b);
  }

  RemoteProvider warm("http://127.0.0.1:" + std::to_string(port),
                      model->vocabulary(), 0.7);
  NgramProvider local_warm(model, 0.7);
  const auto ctx = model->vocabulary().tokenize("the");
  const Distribution a = local_warm.next_distribution(ctx, {});
  const Distribution b = warm.next_distribution(ctx, {});
  CHECK(std::equal(a.order().begin(), a.order().end(), b.order().begin()));
  for (TokenId i = 0; i < a.size(); ++i)
    CHECK(b.prob(i) == doctest::Approx(a.prob(i)).epsilon(1e-12));
  server.stop();
}

TEST_CASE("unreachable endpoint raises a transport error") {
  RemoteOptions opts;
  opts.timeout = std::chrono::milliseconds(500);
  RemoteProvider remote("http://127.0.0.1:1", testing::numbered_vocab(4), 1.0,
                        opts);
  CHECK_THROWS_AS(remote.next_distribution({}, {}), TransportError);
}
