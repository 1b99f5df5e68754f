// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankstego/codec/codebook.hpp"
#include "rankstego/lm/provider.hpp"
#include "rankstego/stego/config.hpp"

namespace rankstego::metrics {

using lm::ModelProvider;
using lm::TokenId;

inline constexpr std::string_view kReportSchema = "eval-v1";
inline constexpr std::size_t kWindowTokens = 10;

// Code points in a UTF-8 string (continuation bytes are not counted).
std::size_t utf8_length(std::string_view text);

// 100 * chars(message) / chars(stego_text). Throws ParameterError when the
// stego text is empty.
double payload_capacity(std::string_view message, std::string_view stego_text);

// exp of the mean negative log-likelihood of `tokens`, each conditioned on
// `context` and the preceding tokens. A zero-probability token yields
// +infinity rather than an exception.
double perplexity(const ModelProvider& provider,
                  std::span<const TokenId> tokens,
                  std::span<const TokenId> context);

// Perplexity of the first `window` generated tokens conditioned on the last
// `window` context tokens, i.e. the seam between prompt and continuation.
double ppl_window(const ModelProvider& provider,
                  std::span<const TokenId> context,
                  std::span<const TokenId> generated,
                  std::size_t window = kWindowTokens);

struct EvalReport {
  double payload_pct = 0.0;
  double bits_per_token = 0.0;  // embedded cipher bits per stego token
  double ppl = 0.0;
  double ppl20 = 0.0;
  double embed_seconds = 0.0;
  double extract_seconds = 0.0;
  double stego_tokens = 0.0;
  double gated_tokens = 0.0;
};

enum class RunStatus { kOk, kCapacityExhausted, kMismatch, kDesync, kError };

std::string_view to_string(RunStatus status);

struct RunRecord {
  std::size_t message_index = 0;
  RunStatus status = RunStatus::kOk;
  std::optional<EvalReport> report;  // set when status is kOk
  std::string detail;
};

struct SweepCell {
  double alpha = 0.0;
  int beta = 0;
  std::vector<RunRecord> runs;
  std::optional<EvalReport> mean;  // over kOk runs
  std::size_t ok = 0;
  std::size_t capacity_exhausted = 0;
  std::size_t failed = 0;
};

struct SweepOptions {
  std::size_t threads = 1;
  std::string scoring_model = "reference";
  bool include_timing = true;
};

// One embed / extract / score cycle. Timings cover the codec calls only.
// Errors propagate.
EvalReport evaluate(const ModelProvider& provider, const ModelProvider& scorer,
                    const codec::Codebook& codebook,
                    const stego::StegoConfig& config, std::string_view message);

// Runs every message under every (alpha, beta) pair. Per-run failures are
// recorded in their cell and the sweep continues. Cells come back in grid
// order (alpha major) regardless of thread count.
std::vector<SweepCell> sweep(const ModelProvider& provider,
                             const ModelProvider& scorer,
                             const codec::Codebook& codebook,
                             const stego::StegoConfig& base,
                             std::span<const double> alphas,
                             std::span<const int> betas,
                             std::span<const std::string> messages,
                             const SweepOptions& options = {});

// JSON lines: one "run" object per (alpha, beta, message) followed by one
// "cell" summary per grid point, all tagged "schema": "eval-v1".
void write_jsonl(std::ostream& out, std::span<const SweepCell> cells,
                 const SweepOptions& options = {});

}  // namespace rankstego::metrics
