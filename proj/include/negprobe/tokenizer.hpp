#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace negprobe {

using TokenId = std::int32_t;

inline constexpr std::size_t kDefaultContextLength = 77;

// Byte-pair-encoding vocabulary in the CLIP layout: byte-level base symbols,
// word-final variants carrying "</w>", merge products, then the two specials.
// Immutable after load.
class Vocabulary {
 public:
  // Throws Error on a duplicate token, a malformed merge line, a merge whose
  // operands or product are not tokens, or missing special tokens.
  static Vocabulary from_parts(std::vector<std::string> tokens,
                               std::vector<std::pair<std::string, std::string>> merges);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t merge_count() const noexcept { return merge_count_; }

  TokenId start_of_text() const noexcept { return start_of_text_; }
  TokenId end_of_text() const noexcept { return end_of_text_; }
  TokenId pad() const noexcept { return end_of_text_; }

  // -1 when absent.
  TokenId id_of(std::string_view token) const;
  const std::string& token(TokenId id) const;  // throws on out-of-range id

  // Merge priority of (left, right); lower merges first. -1 when no rule exists.
  std::int64_t merge_rank(std::string_view left, std::string_view right) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::unordered_map<std::string, std::int64_t> ranks_;  // key: "left right"
  std::size_t merge_count_ = 0;
  TokenId start_of_text_ = -1;
  TokenId end_of_text_ = -1;
};

// Vocabulary file: one token per line (id = 0-based line number), a blank line,
// then one "left right" merge per line in priority order.
Vocabulary load_vocab(const std::filesystem::path& path);

// Fixed-length id sequence: start marker, subword ids, end marker, then pad
// (= end marker) up to the context length.
class TokenSequence {
 public:
  // Validates the layout invariants against the given special ids.
  static TokenSequence from_ids(std::vector<TokenId> ids, TokenId start_of_text,
                                TokenId end_of_text);

  std::span<const TokenId> ids() const noexcept { return ids_; }
  std::size_t context_length() const noexcept { return ids_.size(); }
  std::size_t eot_index() const noexcept { return eot_index_; }

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<TokenId> ids_;
  std::size_t eot_index_ = 0;
};

// NFC, lowercase, whitespace runs collapsed to one space, ends trimmed.
std::string normalize_text(std::string_view text);

// Subword ids for already-normalized text, without specials.
std::vector<TokenId> bpe_ids(const Vocabulary& vocab, std::string_view normalized);

TokenSequence encode(const Vocabulary& vocab, std::string_view text,
                     std::size_t context_length = kDefaultContextLength);

std::string decode(const Vocabulary& vocab, const TokenSequence& seq);

}  // namespace negprobe
