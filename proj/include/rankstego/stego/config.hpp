// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rankstego/codec/keystream.hpp"
#include "rankstego/lm/vocabulary.hpp"

namespace rankstego::stego {

using lm::TokenId;

inline constexpr double kDefaultAlpha = 0.6;
inline constexpr int kDefaultBeta = 3;
inline constexpr double kDefaultTemperature = 0.7;
inline constexpr std::size_t kDefaultMaxTokens = 4096;
inline constexpr std::string_view kDefaultPrivateContext =
    "this is an emergency broadcast :";

// Parameters both parties must share for a session.
struct StegoConfig {
  double alpha = kDefaultAlpha;  // entropy gate coefficient, in (0, 1)
  int beta = kDefaultBeta;       // bits per gated token, in [1, 16]
  codec::SecretKey key;
  // Consumed when constructing the provider; the codec itself only sees the
  // tempered distributions.
  double temperature = kDefaultTemperature;
  std::vector<TokenId> private_context;
  std::vector<TokenId> stego_context;
  std::size_t max_tokens = kDefaultMaxTokens;
  // Seeds the sampler for ungated steps. The receiver never needs it.
  std::uint64_t rng_seed = 0;

  // Throws ParameterError unless 0 < alpha < 1, 1 <= beta <= 16,
  // 2^beta <= vocab_size - 1 (</s> is masked), max_tokens >= 1 and
  // temperature > 0.
  void validate(std::size_t vocab_size) const;
};

// JSON session file as written by operators:
//   {"alpha": 0.6, "beta": 3, "temperature": 0.7, "key": "<64 hex>",
//    "private_context": "...", "stego_context": "...",
//    "max_tokens": 4096, "rng_seed": 0}
// Every field is optional and falls back to the defaults above.
struct SessionFile {
  double alpha = kDefaultAlpha;
  int beta = kDefaultBeta;
  double temperature = kDefaultTemperature;
  std::optional<std::string> key_hex;
  std::string private_context{kDefaultPrivateContext};
  std::string stego_context;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::uint64_t rng_seed = 0;
};

// Throws ParameterError on malformed JSON or wrongly typed fields.
SessionFile parse_session(std::string_view json_text);

// Tokenizes the contexts and attaches `key`. Throws ParameterError when the
// result fails validate().
StegoConfig make_config(const SessionFile& session,
                        const lm::Vocabulary& vocab,
                        const codec::SecretKey& key);

}  // namespace rankstego::stego
