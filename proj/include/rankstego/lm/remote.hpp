// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankstego/lm/provider.hpp"

namespace rankstego::lm {

// Wire protocol for logits-serving backends.
//
//   POST /v1/next-distribution
//   request:  {"context": [int, ...], "temperature": float}
//   response: {"probs": [{"id": int, "p": float}, ...], "tail_mass": float}
//
// The response lists either the full vocabulary or the top M entries; in
// the latter case "tail_mass" is required and is spread uniformly over the
// unlisted ids. Listed mass plus tail mass must equal 1 within 2^-40.
inline constexpr std::string_view kDistributionPath = "/v1/next-distribution";
inline constexpr double kRemoteSumTolerance = 0x1p-40;

struct DistributionRequest {
  std::vector<TokenId> context;
  double temperature = 1.0;
};

std::string encode_request(const DistributionRequest& request);
DistributionRequest decode_request(std::string_view body);

// top_m == 0 lists the whole vocabulary.
std::string encode_response(const Distribution& dist, std::size_t top_m = 0);

// Rebuilds a Distribution, applying the canonical tie-break locally.
// Throws ProtocolError on malformed JSON or ids, and ValidationError when
// the mass check fails or fewer than `min_listed` entries arrive in a
// partial listing.
Distribution decode_response(std::string_view body, std::size_t vocab_size,
                             std::size_t min_listed = 0);

// Renormalized power transform p^(1/T).
Distribution apply_temperature(const Distribution& dist, double temperature);

struct RemoteOptions {
  std::size_t max_context = 4096;
  // Smallest acceptable top-M listing; 2^16 + 1 covers any beta with </s>
  // masked, smaller values are fine when beta is known to be small.
  std::size_t min_listed = 17;
  std::chrono::milliseconds timeout{10000};
};

// Client for a remote inference endpoint, e.g. "http://127.0.0.1:8080".
// The endpoint must be deterministic; this class validates what it receives
// but cannot enforce that.
class RemoteProvider : public ModelProvider {
 public:
  RemoteProvider(std::string endpoint, Vocabulary vocab, double temperature,
                 RemoteOptions options = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t max_context() const override { return options_.max_context; }

 protected:
  Distribution compute(std::span<const TokenId> history,
                       std::span<const TokenId> context) const override;

 private:
  std::string endpoint_;
  Vocabulary vocab_;
  double temperature_;
  RemoteOptions options_;
};

// Serves a local provider over the wire protocol on a background thread.
// Request temperatures are applied on top of the wrapped provider's output.
class DistributionServer {
 public:
  explicit DistributionServer(const ModelProvider& provider,
                              std::size_t top_m = 0);
  ~DistributionServer();

  DistributionServer(const DistributionServer&) = delete;
  DistributionServer& operator=(const DistributionServer&) = delete;

  // Binds to an ephemeral port on `host` and starts serving; returns the port.
  int start(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rankstego::lm
