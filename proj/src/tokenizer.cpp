#include "negprobe/tokenizer.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <fstream>
#include <limits>
#include <sstream>

#include "negprobe/error.hpp"

namespace negprobe {
namespace {

constexpr std::string_view kWordEnd = "</w>";

// Reversible byte -> printable code point table used by the CLIP BPE.
struct ByteSymbols {
  std::array<std::string, 256> encode;
  std::unordered_map<std::string, std::uint8_t> decode;

  ByteSymbols() {
    std::array<bool, 256> printable{};
    auto mark = [&](int lo, int hi) {
      for (int b = lo; b <= hi; ++b) printable[b] = true;
    };
    mark('!', '~');
    mark(0xA1, 0xAC);
    mark(0xAE, 0xFF);
    int extra = 0;
    for (int b = 0; b < 256; ++b) {
      UChar32 cp = printable[b] ? b : 256 + extra++;
      char buf[4];
      int32_t len = 0;
      U8_APPEND_UNSAFE(reinterpret_cast<uint8_t*>(buf), len, cp);
      encode[b].assign(buf, static_cast<std::size_t>(len));
      decode.emplace(encode[b], static_cast<std::uint8_t>(b));
    }
  }
};

const ByteSymbols& byte_symbols() {
  static const ByteSymbols table;
  return table;
}

std::string merge_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left).push_back(' ');
  key.append(right);
  return key;
}

bool is_space(UChar32 c) {
  // Matches Python's str.isspace(), which drives CLIP's whitespace cleanup.
  return u_isUWhiteSpace(c) || (c >= 0x1C && c <= 0x1F);
}

bool is_letter(UChar32 c) { return (U_GET_GC_MASK(c) & U_GC_L_MASK) != 0; }
bool is_number(UChar32 c) { return (U_GET_GC_MASK(c) & U_GC_N_MASK) != 0; }

UChar32 code_point_at(std::string_view s, std::size_t pos, std::size_t& next) {
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  next = static_cast<std::size_t>(i);
  return c < 0 ? 0xFFFD : c;
}

// Splits one pre-token into byte symbols and applies merges by rank.
std::vector<std::string> bpe_word(const Vocabulary& vocab, std::string_view piece) {
  const auto& table = byte_symbols();
  std::vector<std::string> word;
  word.reserve(piece.size());
  for (unsigned char b : piece) word.push_back(table.encode[b]);
  word.back().append(kWordEnd);

  while (word.size() > 1) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    std::size_t best_at = 0;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      std::int64_t r = vocab.merge_rank(word[i], word[i + 1]);
      if (r >= 0 && r < best) {
        best = r;
        best_at = i;
      }
    }
    if (best == std::numeric_limits<std::int64_t>::max()) break;

    const std::string first = word[best_at];
    const std::string second = word[best_at + 1];
    std::vector<std::string> merged;
    merged.reserve(word.size());
    for (std::size_t i = 0; i < word.size();) {
      if (i + 1 < word.size() && word[i] == first && word[i + 1] == second) {
        merged.push_back(first + second);
        i += 2;
      } else {
        merged.push_back(std::move(word[i]));
        i += 1;
      }
    }
    word = std::move(merged);
  }
  return word;
}

}  // namespace

Vocabulary Vocabulary::from_parts(std::vector<std::string> tokens,
                                  std::vector<std::pair<std::string, std::string>> merges) {
  Vocabulary v;
  if (tokens.size() > static_cast<std::size_t>(std::numeric_limits<TokenId>::max())) {
    throw Error("vocabulary too large");
  }
  v.ids_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].empty()) throw Error("empty token at id " + std::to_string(i));
    if (!v.ids_.emplace(tokens[i], static_cast<TokenId>(i)).second) {
      throw Error("duplicate token: " + tokens[i]);
    }
  }
  v.tokens_ = std::move(tokens);

  v.ranks_.reserve(merges.size());
  for (std::size_t rank = 0; rank < merges.size(); ++rank) {
    const auto& [left, right] = merges[rank];
    for (const std::string* operand : {&left, &right}) {
      if (!v.ids_.contains(*operand)) {
        throw Error("merge references unknown token: " + *operand);
      }
    }
    if (!v.ids_.contains(left + right)) {
      throw Error("merge references unknown token: " + left + right);
    }
    // A repeated rule keeps its first (highest-priority) rank.
    v.ranks_.emplace(merge_key(left, right), static_cast<std::int64_t>(rank));
  }
  v.merge_count_ = merges.size();

  auto find_special = [&](std::initializer_list<std::string_view> names) -> TokenId {
    for (auto name : names) {
      if (auto id = v.id_of(name); id >= 0) return id;
    }
    return -1;
  };
  v.start_of_text_ = find_special({"<|startoftext|>", "<start_of_text>"});
  v.end_of_text_ = find_special({"<|endoftext|>", "<end_of_text>"});
  if (v.start_of_text_ < 0) throw Error("missing special token: <|startoftext|>");
  if (v.end_of_text_ < 0) throw Error("missing special token: <|endoftext|>");
  return v;
}

TokenId Vocabulary::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error("unknown id: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::int64_t Vocabulary::merge_rank(std::string_view left, std::string_view right) const {
  auto it = ranks_.find(merge_key(left, right));
  return it == ranks_.end() ? -1 : it->second;
}

Vocabulary load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open vocabulary file: " + path.string());

  std::vector<std::string> tokens;
  std::vector<std::pair<std::string, std::string>> merges;
  std::unordered_map<std::string, std::size_t> seen;
  bool in_merges = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!in_merges) {
      if (line.empty()) {
        in_merges = true;
        continue;
      }
      if (!seen.emplace(line, line_no).second) {
        throw ParseError("duplicate token '" + line + "' (first seen on line " +
                             std::to_string(seen[line]) + ")",
                         line_no);
      }
      tokens.push_back(line);
      continue;
    }
    if (line.empty()) continue;
    auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size() ||
        line.find(' ', space + 1) != std::string::npos) {
      throw ParseError("malformed merge line '" + line + "'", line_no);
    }
    merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  if (tokens.empty()) throw Error("vocabulary file has no tokens: " + path.string());
  return Vocabulary::from_parts(std::move(tokens), std::move(merges));
}

TokenSequence TokenSequence::from_ids(std::vector<TokenId> ids, TokenId start_of_text,
                                      TokenId end_of_text) {
  if (start_of_text == end_of_text) throw Error("start and end markers must differ");
  if (ids.size() < 3) throw Error("token sequence shorter than 3");
  if (ids.front() != start_of_text) throw Error("token sequence must begin with start marker");
  std::size_t eot = 0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == end_of_text) {
      eot = i;
      break;
    }
  }
  if (eot == 0) throw Error("token sequence has no end marker");
  for (std::size_t i = eot + 1; i < ids.size(); ++i) {
    if (ids[i] != end_of_text) throw Error("non-pad id after end marker");
  }
  TokenSequence seq;
  seq.ids_ = std::move(ids);
  seq.eot_index_ = eot;
  return seq;
}

std::string normalize_text(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u = nfc->normalize(u, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  u.toLower(icu::Locale::getRoot());

  std::string lowered;
  u.toUTF8String(lowered);

  std::string out;
  out.reserve(lowered.size());
  bool pending_space = false;
  for (std::size_t pos = 0; pos < lowered.size();) {
    std::size_t next = pos;
    UChar32 c = code_point_at(lowered, pos, next);
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.append(lowered, pos, next - pos);
    }
    pos = next;
  }
  return out;
}

std::vector<TokenId> bpe_ids(const Vocabulary& vocab, std::string_view text) {
  static constexpr std::array<std::string_view, 7> kContractions = {"'s", "'t", "'re", "'ve",
                                                                     "'m", "'ll", "'d"};
  const std::array<std::pair<std::string_view, TokenId>, 2> specials = {{
      {vocab.token(vocab.start_of_text()), vocab.start_of_text()},
      {vocab.token(vocab.end_of_text()), vocab.end_of_text()},
  }};

  std::vector<TokenId> ids;
  auto emit = [&](std::string_view piece) {
    for (const auto& symbol : bpe_word(vocab, piece)) {
      TokenId id = vocab.id_of(symbol);
      if (id < 0) throw Error("token not in vocabulary: " + symbol);
      ids.push_back(id);
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::string_view rest = text.substr(pos);
    bool matched = false;
    for (const auto& [name, id] : specials) {
      if (rest.starts_with(name)) {
        ids.push_back(id);
        pos += name.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto c : kContractions) {
      if (rest.starts_with(c)) {
        emit(c);
        pos += c.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;

    std::size_t next = pos;
    UChar32 c = code_point_at(text, pos, next);
    if (is_space(c)) {
      pos = next;
      continue;
    }
    if (is_number(c)) {
      emit(text.substr(pos, next - pos));
      pos = next;
      continue;
    }
    // Letter run, or run of anything that is neither space, letter nor number.
    const bool letters = is_letter(c);
    std::size_t end = next;
    while (end < text.size()) {
      std::size_t after = end;
      UChar32 d = code_point_at(text, end, after);
      bool same = letters ? is_letter(d) : !(is_space(d) || is_letter(d) || is_number(d));
      if (!same) break;
      end = after;
    }
    emit(text.substr(pos, end - pos));
    pos = end;
  }
  return ids;
}

TokenSequence encode(const Vocabulary& vocab, std::string_view text, std::size_t context_length) {
  if (context_length < 3) throw Error("context_length must be at least 3");
  std::vector<TokenId> ids;
  ids.reserve(context_length);
  ids.push_back(vocab.start_of_text());
  for (TokenId id : bpe_ids(vocab, normalize_text(text))) ids.push_back(id);
  if (ids.size() + 1 > context_length) ids.resize(context_length - 1);
  ids.push_back(vocab.end_of_text());
  ids.resize(context_length, vocab.pad());
  return TokenSequence::from_ids(std::move(ids), vocab.start_of_text(), vocab.end_of_text());
}

std::string decode(const Vocabulary& vocab, const TokenSequence& seq) {
  const auto& table = byte_symbols();
  for (TokenId id : seq.ids()) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab.size()) {
      throw Error("unknown id: " + std::to_string(id));
    }
  }

  std::string out;
  for (std::size_t i = 1; i < seq.eot_index(); ++i) {
    TokenId id = seq.ids()[i];
    if (id == vocab.start_of_text() || id == vocab.end_of_text()) continue;
    std::string_view tok = vocab.token(id);
    bool word_end = tok.ends_with(kWordEnd);
    if (word_end) tok.remove_suffix(kWordEnd.size());
    for (std::size_t pos = 0; pos < tok.size();) {
      std::size_t next = pos;
      code_point_at(tok, pos, next);
      auto it = table.decode.find(std::string(tok.substr(pos, next - pos)));
      if (it == table.decode.end()) {
        throw Error("token has no byte mapping: " + std::string(tok));
      }
      out.push_back(static_cast<char>(it->second));
      pos = next;
    }
    if (word_end) out.push_back(' ');
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

}  // namespace negprobe
