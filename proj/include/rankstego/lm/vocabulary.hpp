// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rankstego::lm {

using TokenId = std::uint32_t;

inline constexpr std::string_view kEosSurface = "</s>";
inline constexpr std::string_view kUnkSurface = "<unk>";

// Dense id <-> surface table with word-level whitespace tokenization.
//
// Ids are exactly {0, ..., size()-1}. The end-of-sequence marker "</s>" is
// mandatory; "<unk>" is optional, and without it tokenizing an unknown word
// throws instead of degrading.
class Vocabulary {
 public:
  // Table holding only the special tokens: "</s>" = 0, "<unk>" = 1.
  Vocabulary();

  // Takes the table verbatim: surfaces[i] becomes id i.
  explicit Vocabulary(std::vector<std::string> surfaces);

  // Specials first, then the distinct words in byte-lexicographic order.
  static Vocabulary from_words(std::span<const std::string> words);

  std::size_t size() const { return surfaces_.size(); }
  bool contains(TokenId id) const { return id < surfaces_.size(); }

  const std::string& surface(TokenId id) const;
  std::optional<TokenId> find(std::string_view word) const;

  TokenId eos() const { return eos_; }
  std::optional<TokenId> unk() const { return unk_; }

  const std::vector<std::string>& surfaces() const { return surfaces_; }

  // Splits on ASCII whitespace. Unknown words map to <unk>; the number of
  // such substitutions is written to `unknown_words` when non-null.
  std::vector<TokenId> tokenize(std::string_view text,
                                std::size_t* unknown_words = nullptr) const;

  // Surfaces joined by single spaces.
  std::string detokenize(std::span<const TokenId> tokens) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.surfaces_ == b.surfaces_;
  }

 private:
  void index();

  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
  TokenId eos_ = 0;
  std::optional<TokenId> unk_;
};

// Whitespace split shared by the tokenizer and the corpus reader.
std::vector<std::string_view> split_words(std::string_view text);

}  // namespace rankstego::lm
