// SPDX-License-Identifier: Apache-2.0

#include "rankstego/lm/vocabulary.hpp"

#include <algorithm>
#include <set>

#include "rankstego/error.hpp"

namespace rankstego::lm {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

Vocabulary::Vocabulary()
    : Vocabulary(std::vector<std::string>{std::string(kEosSurface),
                                          std::string(kUnkSurface)}) {}

Vocabulary::Vocabulary(std::vector<std::string> surfaces)
    : surfaces_(std::move(surfaces)) {
  index();
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  std::set<std::string> distinct(words.begin(), words.end());
  distinct.erase(std::string(kEosSurface));
  distinct.erase(std::string(kUnkSurface));
  std::vector<std::string> table{std::string(kEosSurface),
                                 std::string(kUnkSurface)};
  table.insert(table.end(), distinct.begin(), distinct.end());
  return Vocabulary(std::move(table));
}

void Vocabulary::index() {
  ids_.clear();
  ids_.reserve(surfaces_.size());
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    const std::string& s = surfaces_[i];
    if (s.empty()) throw ParameterError("vocabulary: empty surface string");
    if (std::any_of(s.begin(), s.end(), is_space)) {
      throw ParameterError("vocabulary: surface contains whitespace: " + s);
    }
    if (!ids_.emplace(s, static_cast<TokenId>(i)).second) {
      throw ParameterError("vocabulary: duplicate surface: " + s);
    }
  }
  auto eos = ids_.find(std::string(kEosSurface));
  if (eos == ids_.end()) throw ParameterError("vocabulary: missing </s>");
  eos_ = eos->second;
  auto unk = ids_.find(std::string(kUnkSurface));
  unk_ = unk == ids_.end() ? std::nullopt : std::optional(unk->second);
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (!contains(id)) {
    throw RangeError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return surfaces_[id];
}

std::optional<TokenId> Vocabulary::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::tokenize(std::string_view text,
                                          std::size_t* unknown_words) const {
  std::vector<TokenId> out;
  std::size_t unknown = 0;
  for (std::string_view w : split_words(text)) {
    if (auto id = find(w)) {
      out.push_back(*id);
      continue;
    }
    if (!unk_) {
      throw ParameterError("word not in vocabulary: " + std::string(w));
    }
    out.push_back(*unk_);
    ++unknown;
  }
  if (unknown_words) *unknown_words = unknown;
  return out;
}

std::string Vocabulary::detokenize(std::span<const TokenId> tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += surface(tokens[i]);
  }
  return out;
}

}  // namespace rankstego::lm
