// SPDX-License-Identifier: Apache-2.0

#include "rankstego/metrics.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <thread>

#include "rankstego/error.hpp"
#include "rankstego/stego/stego.hpp"

namespace rankstego::metrics {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

SweepCell run_cell(const ModelProvider& provider, const ModelProvider& scorer,
                   const codec::Codebook& codebook, stego::StegoConfig config,
                   std::span<const std::string> messages) {
  SweepCell cell;
  cell.alpha = config.alpha;
  cell.beta = config.beta;
  EvalReport sum;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    RunRecord rec;
    rec.message_index = i;
    try {
      rec.report = evaluate(provider, scorer, codebook, config, messages[i]);
      rec.status = RunStatus::kOk;
    } catch (const CapacityExhaustedError& e) {
      rec.status = RunStatus::kCapacityExhausted;
      rec.detail = e.what();
    } catch (const DesyncError& e) {
      rec.status = RunStatus::kDesync;
      rec.detail = e.what();
    } catch (const ValidationError& e) {
      rec.status = RunStatus::kMismatch;
      rec.detail = e.what();
    } catch (const Error& e) {
      rec.status = RunStatus::kError;
      rec.detail = e.what();
    }
    switch (rec.status) {
      case RunStatus::kOk: {
        ++cell.ok;
        const EvalReport& r = *rec.report;
        sum.payload_pct += r.payload_pct;
        sum.bits_per_token += r.bits_per_token;
        sum.ppl += r.ppl;
        sum.ppl20 += r.ppl20;
        sum.embed_seconds += r.embed_seconds;
        sum.extract_seconds += r.extract_seconds;
        sum.stego_tokens += r.stego_tokens;
        sum.gated_tokens += r.gated_tokens;
        break;
      }
      case RunStatus::kCapacityExhausted:
        ++cell.capacity_exhausted;
        break;
      default:
        ++cell.failed;
    }
    cell.runs.push_back(std::move(rec));
  }
  if (cell.ok > 0) {
    const auto n = static_cast<double>(cell.ok);
    EvalReport m;
    m.payload_pct = sum.payload_pct / n;
    m.bits_per_token = sum.bits_per_token / n;
    m.ppl = sum.ppl / n;
    m.ppl20 = sum.ppl20 / n;
    m.embed_seconds = sum.embed_seconds / n;
    m.extract_seconds = sum.extract_seconds / n;
    m.stego_tokens = sum.stego_tokens / n;
    m.gated_tokens = sum.gated_tokens / n;
    cell.mean = m;
  }
  return cell;
}

nlohmann::json report_json(const EvalReport& r, bool timing) {
  nlohmann::json j{{"payload_pct", r.payload_pct},
                   {"bits_per_token", r.bits_per_token},
                   {"ppl", r.ppl},
                   {"ppl20", r.ppl20},
                   {"stego_tokens", r.stego_tokens},
                   {"gated_tokens", r.gated_tokens}};
  if (timing) {
    j["embed_seconds"] = r.embed_seconds;
    j["extract_seconds"] = r.extract_seconds;
  }
  // JSON has no infinity; an unscorable sequence is reported as null.
  for (const char* k : {"ppl", "ppl20"}) {
    if (!std::isfinite(j[k].get<double>())) j[k] = nullptr;
  }
  return j;
}

}  // namespace

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

double payload_capacity(std::string_view message,
                        std::string_view stego_text) {
  const std::size_t stego_chars = utf8_length(stego_text);
  if (stego_chars == 0) throw ParameterError("payload of empty stego text");
  return 100.0 * static_cast<double>(utf8_length(message)) /
         static_cast<double>(stego_chars);
}

double perplexity(const ModelProvider& provider,
                  std::span<const TokenId> tokens,
                  std::span<const TokenId> context) {
  if (tokens.empty()) throw ParameterError("perplexity of empty sequence");
  // Base 2 in extended precision: dyadic probabilities come out exact.
  long double nll_bits = 0.0L;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double p =
        provider.next_distribution(tokens.first(i), context).prob(tokens[i]);
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    nll_bits -= std::log2(static_cast<long double>(p));
  }
  return static_cast<double>(
      std::exp2(nll_bits / static_cast<long double>(tokens.size())));
}

double ppl_window(const ModelProvider& provider,
                  std::span<const TokenId> context,
                  std::span<const TokenId> generated, std::size_t window) {
  if (generated.empty()) throw ParameterError("ppl window of empty sequence");
  const std::size_t ctx_n = std::min(window, context.size());
  const std::size_t gen_n = std::min(window, generated.size());
  return perplexity(provider, generated.first(gen_n), context.last(ctx_n));
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kOk:
      return "ok";
    case RunStatus::kCapacityExhausted:
      return "capacity-exhausted";
    case RunStatus::kMismatch:
      return "mismatch";
    case RunStatus::kDesync:
      return "desync";
    case RunStatus::kError:
      return "error";
  }
  return "error";
}

EvalReport evaluate(const ModelProvider& provider, const ModelProvider& scorer,
                    const codec::Codebook& codebook,
                    const stego::StegoConfig& config,
                    std::string_view message) {
  const lm::Vocabulary& vocab = provider.vocabulary();
  auto start = std::chrono::steady_clock::now();
  const stego::EmbedResult sent =
      stego::embed(provider, codebook, config, message);
  const double embed_s = seconds_since(start);

  start = std::chrono::steady_clock::now();
  const std::string got =
      stego::extract(provider, codebook, config, sent.stego_tokens);
  const double extract_s = seconds_since(start);

  const std::string expected = vocab.detokenize(sent.message_tokens);
  if (got != expected) {
    throw ValidationError("extracted message differs from the original");
  }

  EvalReport r;
  r.payload_pct =
      payload_capacity(expected, vocab.detokenize(sent.stego_tokens));
  r.bits_per_token = static_cast<double>(sent.cipher_bits.size()) /
                     static_cast<double>(sent.stego_tokens.size());
  r.ppl = perplexity(scorer, sent.stego_tokens, config.stego_context);
  r.ppl20 = ppl_window(scorer, config.stego_context, sent.stego_tokens);
  r.embed_seconds = embed_s;
  r.extract_seconds = extract_s;
  r.stego_tokens = static_cast<double>(sent.stego_tokens.size());
  for (const auto& rec : sent.trace) r.gated_tokens += rec.gated ? 1.0 : 0.0;
  return r;
}

std::vector<SweepCell> sweep(const ModelProvider& provider,
                             const ModelProvider& scorer,
                             const codec::Codebook& codebook,
                             const stego::StegoConfig& base,
                             std::span<const double> alphas,
                             std::span<const int> betas,
                             std::span<const std::string> messages,
                             const SweepOptions& options) {
  if (alphas.empty() || betas.empty()) {
    throw ParameterError("sweep grid must be non-empty");
  }
  std::vector<stego::StegoConfig> grid;
  for (double a : alphas) {
    for (int b : betas) {
      stego::StegoConfig c = base;
      c.alpha = a;
      c.beta = b;
      c.validate(provider.vocabulary().size());
      grid.push_back(std::move(c));
    }
  }

  std::vector<SweepCell> cells(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      cells[i] = run_cell(provider, scorer, codebook, grid[i], messages);
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min(options.threads, grid.size()));
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  return cells;
}

void write_jsonl(std::ostream& out, std::span<const SweepCell> cells,
                 const SweepOptions& options) {
  using nlohmann::json;
  for (const SweepCell& cell : cells) {
    for (const RunRecord& run : cell.runs) {
      json j{{"schema", kReportSchema},
             {"type", "run"},
             {"alpha", cell.alpha},
             {"beta", cell.beta},
             {"message_index", run.message_index},
             {"status", to_string(run.status)}};
      if (run.report) j.update(report_json(*run.report, options.include_timing));
      if (!run.detail.empty()) j["detail"] = run.detail;
      out << j.dump() << '\n';
    }
    json j{{"schema", kReportSchema},
           {"type", "cell"},
           {"alpha", cell.alpha},
           {"beta", cell.beta},
           {"scoring_model", options.scoring_model},
           {"runs", cell.runs.size()},
           {"ok", cell.ok},
           {"capacity_exhausted", cell.capacity_exhausted},
           {"failed", cell.failed}};
    if (cell.mean) j.update(report_json(*cell.mean, options.include_timing));
    out << j.dump() << '\n';
  }
}

}  // namespace rankstego::metrics
