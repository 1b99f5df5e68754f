// SPDX-License-Identifier: Apache-2.0

#include "rankstego/stego/stego.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "rankstego/codec/keystream.hpp"
#include "rankstego/error.hpp"

namespace rankstego::stego {

namespace {

// Uniform double in [0, 1) from the top 53 bits; mt19937_64 output is fixed
// by the standard, so the sample path is portable.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53;
}

TokenId sample(const Distribution& dist, std::mt19937_64& rng) {
  const double target = uniform01(rng);
  const auto probs = dist.probs();
  double cumulative = 0.0;
  std::optional<TokenId> last;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last = static_cast<TokenId>(i);
    if (target < cumulative) return *last;
  }
  return *last;
}

bool prefix_equal(const BitStream& longer, const BitStream& shorter) {
  return longer.size() >= shorter.size() &&
         longer.slice(0, shorter.size()) == shorter;
}

void extract_into(const ModelProvider& provider, const Codebook& codebook,
                  const StegoConfig& config,
                  std::span<const TokenId> stego_tokens, ExtractResult& out) {
  const lm::Vocabulary& vocab = provider.vocabulary();
  config.validate(vocab.size());

  out.symbols.beta = config.beta;
  for (std::size_t i = 0; i < stego_tokens.size(); ++i) {
    if (!vocab.contains(stego_tokens[i])) {
      throw DesyncError("stego token outside vocabulary at position " +
                        std::to_string(i));
    }
    const Distribution dist = stego_step_distribution(
        provider, stego_tokens.first(i), config.stego_context);
    const CandidateSet cs = norm_entropy(dist, config.beta);
    if (!gate_open(cs.entropy, config.alpha, config.beta)) continue;
    auto hit = std::find(cs.candidates.begin(), cs.candidates.end(),
                         stego_tokens[i]);
    if (hit == cs.candidates.end()) {
      throw DesyncError("gated token at position " + std::to_string(i) +
                        " is not among its candidates");
    }
    out.symbols.symbols.push_back(
        static_cast<std::uint32_t>(hit - cs.candidates.begin()));
  }

  out.cipher_bits = codec::from_beta_symbols(out.symbols);
  out.plain_bits = codec::keystream_xor(config.key, out.cipher_bits);
  out.ranks = codec::decode_ranks(codebook, out.plain_bits);
  if (out.ranks.empty()) throw DesyncError("no ranks in recovered bit stream");

  ranking::Decompressed d;
  try {
    d = ranking::decompress_ranks(provider, out.ranks, config.private_context);
  } catch (const RangeError& e) {
    throw DesyncError(std::string("decoded rank out of range: ") + e.what());
  }
  out.tokens = std::move(d.tokens);
  if (!d.terminated) {
    throw DesyncError("rank stream ended without end-of-sequence");
  }
  out.message = vocab.detokenize(out.tokens);
}

}  // namespace

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

CandidateSet norm_entropy(const Distribution& dist, int beta) {
  if (beta < 1 || beta > codec::kMaxBeta) {
    throw ParameterError("beta must be in [1, 16]");
  }
  const std::size_t n = std::size_t{1} << beta;
  if (n > dist.size()) {
    throw ParameterError("2^beta exceeds the distribution size");
  }
  CandidateSet cs;
  cs.candidates.assign(dist.order().begin(), dist.order().begin() + n);
  cs.normalized.reserve(n);
  double total = 0.0;
  for (TokenId id : cs.candidates) total += dist.prob(id);
  if (!(total > 0.0)) throw ValidationError("candidate set has no mass");
  for (TokenId id : cs.candidates) cs.normalized.push_back(dist.prob(id) / total);
  cs.entropy = entropy_bits(cs.normalized);
  return cs;
}

Distribution stego_step_distribution(const ModelProvider& provider,
                                     std::span<const TokenId> generated,
                                     std::span<const TokenId> stego_context) {
  return provider.next_distribution(generated, stego_context)
      .without(provider.vocabulary().eos());
}

EmbedResult embed(const ModelProvider& provider, const Codebook& codebook,
                  const StegoConfig& config, std::string_view message) {
  std::size_t unknown = 0;
  const std::vector<TokenId> tokens =
      provider.vocabulary().tokenize(message, &unknown);
  EmbedResult r = embed_tokens(provider, codebook, config, tokens);
  r.unknown_words = unknown;
  return r;
}

EmbedResult embed_tokens(const ModelProvider& provider,
                         const Codebook& codebook, const StegoConfig& config,
                         std::span<const TokenId> message_tokens) {
  config.validate(provider.vocabulary().size());
  if (message_tokens.empty()) throw ParameterError("empty message");

  EmbedResult r;
  r.message_tokens.assign(message_tokens.begin(), message_tokens.end());
  r.ranks = ranking::compress_message(provider, message_tokens,
                                      config.private_context);
  r.plain_bits = codec::encode_ranks(codebook, r.ranks);
  r.cipher_bits = codec::keystream_xor(config.key, r.plain_bits);
  r.symbols = codec::to_beta_symbols(r.cipher_bits, config.beta);

  std::mt19937_64 rng(config.rng_seed);
  std::size_t next = 0;
  const auto& symbols = r.symbols.symbols;
  while (next < symbols.size()) {
    if (r.stego_tokens.size() >= config.max_tokens) {
      throw CapacityExhaustedError(
          std::to_string(symbols.size() - next) + " of " +
          std::to_string(symbols.size()) + " symbols left after " +
          std::to_string(config.max_tokens) + " tokens");
    }
    const Distribution dist = stego_step_distribution(
        provider, r.stego_tokens, config.stego_context);
    const CandidateSet cs = norm_entropy(dist, config.beta);
    TraceRecord rec;
    rec.position = r.stego_tokens.size();
    rec.entropy = cs.entropy;
    rec.gated = gate_open(cs.entropy, config.alpha, config.beta);
    if (rec.gated) {
      rec.symbol = symbols[next++];
      rec.token = cs.candidates[*rec.symbol];
    } else {
      rec.token = sample(dist, rng);
    }
    r.stego_tokens.push_back(rec.token);
    r.trace.push_back(rec);
  }
  return r;
}

ExtractResult extract_detailed(const ModelProvider& provider,
                               const Codebook& codebook,
                               const StegoConfig& config,
                               std::span<const TokenId> stego_tokens) {
  ExtractResult out;
  extract_into(provider, codebook, config, stego_tokens, out);
  return out;
}

std::string extract(const ModelProvider& provider, const Codebook& codebook,
                    const StegoConfig& config,
                    std::span<const TokenId> stego_tokens) {
  return extract_detailed(provider, codebook, config, stego_tokens).message;
}

std::string VerifyReport::summary() const {
  std::ostringstream os;
  auto line = [&](const char* name, bool eq) {
    os << name << ": " << (eq ? "equal" : "DIFFERENT") << '\n';
  };
  line("beta symbols", symbols_equal);
  line("cipher bits", cipher_bits_equal);
  line("plain bits", plain_bits_equal);
  line("ranks", ranks_equal);
  line("tokens", tokens_equal);
  line("message", message_equal);
  std::size_t gated = 0;
  for (const auto& rec : trace) gated += rec.gated ? 1 : 0;
  os << "stego tokens: " << trace.size() << " (" << gated << " gated)\n";
  if (first_divergence) os << "first divergence: " << *first_divergence << '\n';
  if (error) os << "error: " << *error << '\n';
  os << "result: " << (ok() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

VerifyReport verify_closed_loop(const ModelProvider& provider,
                                const Codebook& codebook,
                                const StegoConfig& config,
                                std::string_view message) {
  return verify_closed_loop(provider, codebook, config, config, message);
}

VerifyReport verify_closed_loop(const ModelProvider& provider,
                                const Codebook& codebook,
                                const StegoConfig& sender,
                                const StegoConfig& receiver,
                                std::string_view message) {
  VerifyReport report;
  EmbedResult sent;
  try {
    sent = embed(provider, codebook, sender, message);
  } catch (const Error& e) {
    report.error = std::string("embed: ") + e.what();
    report.first_divergence = "embed";
    return report;
  }
  report.trace = sent.trace;

  ExtractResult got;
  try {
    extract_into(provider, codebook, receiver, sent.stego_tokens, got);
  } catch (const Error& e) {
    report.error = std::string("extract: ") + e.what();
  }

  report.symbols_equal = got.symbols == sent.symbols;
  report.cipher_bits_equal = prefix_equal(got.cipher_bits, sent.cipher_bits);
  report.plain_bits_equal = prefix_equal(got.plain_bits, sent.plain_bits);
  report.ranks_equal =
      got.ranks.size() >= sent.ranks.size() &&
      std::equal(sent.ranks.begin(), sent.ranks.end(), got.ranks.begin());
  report.tokens_equal = got.tokens == sent.message_tokens;
  report.message_equal =
      !report.error &&
      got.message == provider.vocabulary().detokenize(sent.message_tokens);

  const std::pair<const char*, bool> stages[] = {
      {"beta symbols", report.symbols_equal},
      {"cipher bits", report.cipher_bits_equal},
      {"plain bits", report.plain_bits_equal},
      {"ranks", report.ranks_equal},
      {"tokens", report.tokens_equal},
      {"message", report.message_equal}};
  for (auto [name, eq] : stages) {
    if (!eq) {
      report.first_divergence = name;
      break;
    }
  }
  return report;
}

Codebook calibrate_codebook(const ModelProvider& provider,
                            std::span<const std::vector<TokenId>> calibration,
                            std::span<const TokenId> private_context,
                            std::uint32_t table_size) {
  const std::size_t vocab = provider.vocabulary().size();
  ranking::RankHistogram hist =
      ranking::rank_histogram(provider, calibration, private_context);
  const auto k =
      static_cast<std::uint32_t>(std::min<std::size_t>(table_size, vocab));
  for (std::uint32_t r = 0; r < k; ++r) ++hist[r];
  return codec::build_codebook(hist, k, vocab);
}

}  // namespace rankstego::stego
