// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankstego/codec/beta.hpp"
#include "rankstego/codec/bitstream.hpp"
#include "rankstego/codec/codebook.hpp"
#include "rankstego/lm/provider.hpp"
#include "rankstego/ranking.hpp"
#include "rankstego/stego/config.hpp"

namespace rankstego::stego {

using codec::BetaSymbols;
using codec::BitStream;
using codec::Codebook;
using lm::Distribution;
using lm::ModelProvider;
using ranking::RankSequence;

// Top-2^beta slice of a distribution with renormalized probabilities and
// their Shannon entropy in bits.
struct CandidateSet {
  std::vector<TokenId> candidates;
  std::vector<double> normalized;
  double entropy = 0.0;
};

// Entropy in bits, summed in index order; zero entries contribute nothing.
double entropy_bits(std::span<const double> probs);

// Throws ParameterError when the distribution has fewer than 2^beta entries.
CandidateSet norm_entropy(const Distribution& dist, int beta);

inline bool gate_open(double entropy, double alpha, int beta) {
  return entropy >= alpha * beta;
}

// The distribution a stego step works from: provider output under the stego
// context with </s> masked out.
Distribution stego_step_distribution(const ModelProvider& provider,
                                     std::span<const TokenId> generated,
                                     std::span<const TokenId> stego_context);

struct TraceRecord {
  std::size_t position = 0;
  double entropy = 0.0;
  bool gated = false;
  std::optional<std::uint32_t> symbol;  // set exactly when gated
  TokenId token = 0;
};

using EmbeddingTrace = std::vector<TraceRecord>;

// Every intermediate of the sender pipeline, kept for verification.
struct EmbedResult {
  std::vector<TokenId> message_tokens;
  std::size_t unknown_words = 0;
  RankSequence ranks;
  BitStream plain_bits;   // Huffman-coded ranks
  BitStream cipher_bits;  // after keystream XOR
  BetaSymbols symbols;
  std::vector<TokenId> stego_tokens;
  EmbeddingTrace trace;
};

// Receiver-side intermediates; filled as far as extraction got.
struct ExtractResult {
  BetaSymbols symbols;
  BitStream cipher_bits;
  BitStream plain_bits;
  RankSequence ranks;
  std::vector<TokenId> tokens;
  std::string message;
};

// Message text -> stego tokens. Throws ParameterError for an empty message
// and CapacityExhaustedError when symbols remain after max_tokens steps.
EmbedResult embed(const ModelProvider& provider, const Codebook& codebook,
                  const StegoConfig& config, std::string_view message);

EmbedResult embed_tokens(const ModelProvider& provider,
                         const Codebook& codebook, const StegoConfig& config,
                         std::span<const TokenId> message_tokens);

// Stego tokens -> message text. Uses no randomness. Throws DesyncError when
// a gated token is not among its candidates, a decoded rank is out of
// range, or no </s> terminates the rank stream.
std::string extract(const ModelProvider& provider, const Codebook& codebook,
                    const StegoConfig& config,
                    std::span<const TokenId> stego_tokens);

ExtractResult extract_detailed(const ModelProvider& provider,
                               const Codebook& codebook,
                               const StegoConfig& config,
                               std::span<const TokenId> stego_tokens);

// Stage-by-stage comparison of one embed/extract round trip.
struct VerifyReport {
  bool symbols_equal = false;
  bool cipher_bits_equal = false;
  bool plain_bits_equal = false;
  bool ranks_equal = false;
  bool tokens_equal = false;
  bool message_equal = false;
  std::optional<std::string> first_divergence;
  std::optional<std::string> error;  // embed or extract failure, if any
  EmbeddingTrace trace;

  bool ok() const { return message_equal && !error; }
  std::string summary() const;
};

VerifyReport verify_closed_loop(const ModelProvider& provider,
                                const Codebook& codebook,
                                const StegoConfig& config,
                                std::string_view message);

// Embeds under `sender` and extracts under `receiver`, e.g. to demonstrate
// what a key or context mismatch breaks.
VerifyReport verify_closed_loop(const ModelProvider& provider,
                                const Codebook& codebook,
                                const StegoConfig& sender,
                                const StegoConfig& receiver,
                                std::string_view message);

// Codebook from the rank statistics of `calibration` under the private
// context. Every direct rank gets one pseudo-count so that ranks absent from
// the calibration set still get short codes. The table size is clamped to
// the vocabulary size.
Codebook calibrate_codebook(const ModelProvider& provider,
                            std::span<const std::vector<TokenId>> calibration,
                            std::span<const TokenId> private_context,
                            std::uint32_t table_size = codec::kDefaultTableSize);

}  // namespace rankstego::stego
