// SPDX-License-Identifier: Apache-2.0

#include "rankstego/lm/ngram.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "rankstego/error.hpp"

namespace rankstego::lm {

namespace {

constexpr std::array<char, 4> kMagic{'N', 'G', 'M', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw FormatError("model file truncated");
  }
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

// Last up-to-`n` tokens of history ++ context.
std::vector<TokenId> tail(std::span<const TokenId> history,
                          std::span<const TokenId> context, std::size_t n) {
  std::vector<TokenId> out;
  const std::size_t from_ctx = std::min(n, context.size());
  const std::size_t from_hist = std::min(n - from_ctx, history.size());
  out.insert(out.end(), history.end() - from_hist, history.end());
  out.insert(out.end(), context.end() - from_ctx, context.end());
  return out;
}

}  // namespace

boost::rational<std::int64_t> ExactDistribution::probability(TokenId id) const {
  return {static_cast<std::int64_t>(numerators.at(id)),
          static_cast<std::int64_t>(denominator)};
}

NgramModel NgramModel::train(Vocabulary vocab,
                             std::span<const std::vector<TokenId>> sentences,
                             int order, Smoothing smoothing) {
  if (order < 1) throw ParameterError("n-gram order must be >= 1");
  if (smoothing < 0) throw ParameterError("smoothing must be >= 0");

  NgramModel model(std::move(vocab), order, smoothing);
  std::map<std::vector<TokenId>, std::map<TokenId, std::uint64_t>> raw;
  bool any_tokens = false;
  bool full_order_seen = false;
  for (const auto& s : sentences) {
    any_tokens = any_tokens || !s.empty();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!model.vocab_.contains(s[i])) {
        throw RangeError("corpus token " + std::to_string(s[i]) +
                         " outside vocabulary");
      }
      for (int m = 1; m <= order && static_cast<std::size_t>(m) <= i + 1; ++m) {
        std::vector<TokenId> ctx(s.begin() + (i + 1 - m), s.begin() + i);
        ++raw[std::move(ctx)][s[i]];
        if (m == order) full_order_seen = true;
      }
    }
  }
  if (any_tokens && !full_order_seen) {
    throw DegenerateModelError("order " + std::to_string(order) +
                               " exceeds every sentence in the corpus");
  }
  for (auto& [ctx, next] : raw) {
    ContextCounts cc;
    for (auto [tok, c] : next) {
      cc.total += c;
      cc.next.emplace_back(tok, c);
    }
    model.counts_.emplace(ctx, std::move(cc));
  }
  return model;
}

NgramModel NgramModel::train_tokens(Vocabulary vocab,
                                    std::span<const TokenId> corpus, int order,
                                    Smoothing smoothing) {
  std::vector<std::vector<TokenId>> one{{corpus.begin(), corpus.end()}};
  if (corpus.empty()) one.clear();
  return train(std::move(vocab), one, order, smoothing);
}

NgramModel NgramModel::train_text(std::string_view text, int order,
                                  Smoothing smoothing) {
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> all_words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::vector<std::string> words;
    for (auto w : split_words(text.substr(pos, nl - pos))) {
      words.emplace_back(w);
      all_words.emplace_back(w);
    }
    if (!words.empty()) lines.push_back(std::move(words));
    pos = nl + 1;
  }
  Vocabulary vocab = Vocabulary::from_words(all_words);
  std::vector<std::vector<TokenId>> sentences;
  sentences.reserve(lines.size());
  for (const auto& words : lines) {
    std::vector<TokenId> s;
    s.reserve(words.size() + 1);
    for (const auto& w : words) s.push_back(*vocab.find(w));
    s.push_back(vocab.eos());
    sentences.push_back(std::move(s));
  }
  return train(std::move(vocab), sentences, order, smoothing);
}

ExactDistribution NgramModel::exact_distribution(
    std::span<const TokenId> history, std::span<const TokenId> context) const {
  const std::size_t vocab = vocab_.size();
  std::vector<TokenId> ctx =
      tail(history, context, static_cast<std::size_t>(order_ - 1));

  const ContextCounts* found = nullptr;
  for (;;) {
    auto it = counts_.find(ctx);
    if (it != counts_.end() && it->second.total > 0) {
      found = &it->second;
      break;
    }
    if (ctx.empty()) break;
    ctx.erase(ctx.begin());
  }

  ExactDistribution d;
  const auto a = static_cast<std::uint64_t>(smoothing_.numerator());
  const auto b = static_cast<std::uint64_t>(smoothing_.denominator());
  if (found == nullptr && a == 0) {
    d.numerators.assign(vocab, 1);
    d.denominator = vocab;
    return d;
  }
  d.numerators.assign(vocab, a);
  std::uint64_t total = 0;
  if (found != nullptr) {
    for (auto [tok, c] : found->next) d.numerators[tok] += b * c;
    total = found->total;
  }
  d.denominator = b * total + a * vocab;
  return d;
}

std::uint64_t NgramModel::count(std::span<const TokenId> ctx,
                                TokenId token) const {
  auto it = counts_.find(std::vector<TokenId>(ctx.begin(), ctx.end()));
  if (it == counts_.end()) return 0;
  const auto& next = it->second.next;
  auto hit = std::lower_bound(
      next.begin(), next.end(), token,
      [](const auto& entry, TokenId t) { return entry.first < t; });
  return hit != next.end() && hit->first == token ? hit->second : 0;
}

void NgramModel::save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, static_cast<std::uint64_t>(order_));
  put_u64(out, static_cast<std::uint64_t>(smoothing_.numerator()));
  put_u64(out, static_cast<std::uint64_t>(smoothing_.denominator()));
  put_u64(out, vocab_.size());
  for (const auto& s : vocab_.surfaces()) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  put_u64(out, vocab_.eos());
  std::uint64_t entries = 0;
  for (const auto& [ctx, cc] : counts_) entries += cc.next.size();
  put_u64(out, entries);
  for (const auto& [ctx, cc] : counts_) {
    for (auto [tok, c] : cc.next) {
      put_u64(out, ctx.size());
      for (TokenId t : ctx) put_u64(out, t);
      put_u64(out, tok);
      put_u64(out, c);
    }
  }
  if (!out) throw FormatError("failed writing model");
}

NgramModel NgramModel::load(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("not an NGM1 model file");
  }
  const std::uint64_t order = get_u64(in);
  const auto num = static_cast<std::int64_t>(get_u64(in));
  const auto den = static_cast<std::int64_t>(get_u64(in));
  if (order < 1 || order > 64 || den <= 0 || num < 0) {
    throw FormatError("model header out of range");
  }
  const std::uint64_t vocab_size = get_u64(in);
  if (vocab_size == 0 || vocab_size > (1u << 30)) {
    throw FormatError("model vocabulary size out of range");
  }
  std::vector<std::string> surfaces;
  surfaces.reserve(vocab_size);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    const std::uint64_t len = get_u64(in);
    if (len > (1u << 20)) throw FormatError("vocabulary entry too long");
    std::string s(len, '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(len))) {
      throw FormatError("model file truncated");
    }
    surfaces.push_back(std::move(s));
  }
  Vocabulary vocab = [&] {
    try {
      return Vocabulary(std::move(surfaces));
    } catch (const ParameterError& e) {
      throw FormatError(std::string("bad vocabulary table: ") + e.what());
    }
  }();
  if (get_u64(in) != vocab.eos()) throw FormatError("eos id mismatch");

  NgramModel model(std::move(vocab), static_cast<int>(order),
                   Smoothing(num, den));
  const std::uint64_t entries = get_u64(in);
  for (std::uint64_t e = 0; e < entries; ++e) {
    const std::uint64_t len = get_u64(in);
    if (len >= order) throw FormatError("count context longer than order-1");
    std::vector<TokenId> ctx(len);
    for (auto& t : ctx) {
      const std::uint64_t id = get_u64(in);
      if (id >= vocab_size) throw FormatError("count token out of range");
      t = static_cast<TokenId>(id);
    }
    const std::uint64_t tok = get_u64(in);
    const std::uint64_t c = get_u64(in);
    if (tok >= vocab_size || c == 0) throw FormatError("bad count entry");
    auto& cc = model.counts_[ctx];
    if (!cc.next.empty() && cc.next.back().first >= tok) {
      throw FormatError("count entries not in canonical order");
    }
    cc.next.emplace_back(static_cast<TokenId>(tok), c);
    cc.total += c;
  }
  return model;
}

NgramProvider::NgramProvider(std::shared_ptr<const NgramModel> model,
                             double temperature, std::size_t max_context)
    : model_(std::move(model)),
      temperature_(temperature),
      max_context_(max_context) {
  if (!model_) throw ParameterError("null model");
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_)) {
    throw ParameterError("temperature must be positive");
  }
}

Distribution NgramProvider::compute(std::span<const TokenId> history,
                                    std::span<const TokenId> context) const {
  const ExactDistribution exact = model_->exact_distribution(history, context);
  std::vector<double> probs(exact.numerators.size());
  if (temperature_ == 1.0) {
    const auto den = static_cast<double>(exact.denominator);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      probs[i] = static_cast<double>(exact.numerators[i]) / den;
    }
    return Distribution(std::move(probs));
  }
  // Scaled by the largest numerator so low temperatures cannot overflow.
  const double power = 1.0 / temperature_;
  const auto top = static_cast<double>(
      *std::max_element(exact.numerators.begin(), exact.numerators.end()));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = std::pow(static_cast<double>(exact.numerators[i]) / top, power);
  }
  const double total = stable_sum(probs);
  for (double& p : probs) p /= total;
  return Distribution(std::move(probs));
}

}  // namespace rankstego::lm
