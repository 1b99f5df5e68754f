// SPDX-License-Identifier: Apache-2.0

#include "rankstego/stego/config.hpp"

#include <cmath>
#include <json.hpp>

#include "rankstego/codec/beta.hpp"
#include "rankstego/error.hpp"

namespace rankstego::stego {

void StegoConfig::validate(std::size_t vocab_size) const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ParameterError("alpha must be in (0, 1)");
  }
  if (beta < 1 || beta > codec::kMaxBeta) {
    throw ParameterError("beta must be in [1, 16]");
  }
  if (vocab_size < 2 || (std::size_t{1} << beta) > vocab_size - 1) {
    throw ParameterError("2^beta candidates exceed the vocabulary without </s>");
  }
  if (max_tokens < 1) throw ParameterError("max_tokens must be >= 1");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ParameterError("temperature must be positive");
  }
}

SessionFile parse_session(std::string_view json_text) {
  using nlohmann::json;
  SessionFile s;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw ParameterError("session config must be an object");
    s.alpha = j.value("alpha", s.alpha);
    s.beta = j.value("beta", s.beta);
    s.temperature = j.value("temperature", s.temperature);
    if (j.contains("key") && !j["key"].is_null()) {
      s.key_hex = j["key"].get<std::string>();
    }
    s.private_context = j.value("private_context", s.private_context);
    s.stego_context = j.value("stego_context", s.stego_context);
    s.max_tokens = j.value("max_tokens", s.max_tokens);
    s.rng_seed = j.value("rng_seed", s.rng_seed);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("bad session config: ") + e.what());
  }
  return s;
}

StegoConfig make_config(const SessionFile& session,
                        const lm::Vocabulary& vocab,
                        const codec::SecretKey& key) {
  StegoConfig c;
  c.alpha = session.alpha;
  c.beta = session.beta;
  c.key = key;
  c.temperature = session.temperature;
  c.private_context = vocab.tokenize(session.private_context);
  c.stego_context = vocab.tokenize(session.stego_context);
  c.max_tokens = session.max_tokens;
  c.rng_seed = session.rng_seed;
  c.validate(vocab.size());
  return c;
}

}  // namespace rankstego::stego
