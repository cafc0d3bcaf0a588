#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "negprobe/error.hpp"
#include "negprobe/tokenizer.hpp"
#include "support/temp_dir.hpp"
#include "support/tiny_fixture.hpp"

namespace negprobe {
namespace {

using testing::source_path;

const Vocabulary& clip_vocab() {
  static const Vocabulary v = load_vocab(source_path("data/clip_vocab.txt"));
  return v;
}

nlohmann::json oracle() {
  std::ifstream in(source_path("tests/data/tokenizer_oracle.json"));
  return nlohmann::json::parse(in);
}

// Byte-level base alphabet plus a couple of merges, enough for "ab".
Vocabulary toy_vocab() {
  std::vector<std::string> tokens{"a", "b", "a</w>", "b</w>", "ab</w>", "<|startoftext|>",
                                  "<|endoftext|>"};
  return Vocabulary::from_parts(tokens, {{"a", "b</w>"}});
}

TEST(Vocabulary, ClipLayout) {
  const auto& v = clip_vocab();
  EXPECT_EQ(v.size(), 49408u);
  EXPECT_EQ(v.start_of_text(), 49406);
  EXPECT_EQ(v.end_of_text(), 49407);
  EXPECT_EQ(v.pad(), v.end_of_text());
  EXPECT_EQ(v.merge_count(), 48894u);
  EXPECT_EQ(v.id_of("cat</w>"), 2368);
  EXPECT_EQ(v.id_of("no such token"), -1);
  EXPECT_THROW(v.token(49408), Error);
  EXPECT_THROW(v.token(-1), Error);
}

TEST(Vocabulary, FromPartsRejectsBadInput) {
  EXPECT_THROW(Vocabulary::from_parts({"a", "a", "<|startoftext|>", "<|endoftext|>"}, {}), Error);
  EXPECT_THROW(Vocabulary::from_parts({"a", "b", "<|startoftext|>", "<|endoftext|>"}, {{"a", "b"}}),
               Error);
  EXPECT_THROW(Vocabulary::from_parts({"a", "b"}, {}), Error);
  EXPECT_NO_THROW(Vocabulary::from_parts({"a", "<start_of_text>", "<end_of_text>"}, {}));
  auto v = toy_vocab();
  EXPECT_EQ(v.merge_rank("a", "b</w>"), 0);
  EXPECT_EQ(v.merge_rank("b", "a"), -1);
}

TEST(Vocabulary, LoadRejectsMalformedFile) {
  testing::TempDir dir;
  testing::write_file(dir / "dup.txt", "a\na\n<|startoftext|>\n<|endoftext|>\n\n");
  EXPECT_THROW(load_vocab(dir / "dup.txt"), ParseError);
  testing::write_file(dir / "merge.txt", "a\nb\n<|startoftext|>\n<|endoftext|>\n\na b c\n");
  EXPECT_THROW(load_vocab(dir / "merge.txt"), ParseError);
  EXPECT_THROW(load_vocab(dir / "missing.txt"), Error);
}

TEST(Tokenizer, MatchesReferenceCorpus) {
  auto o = oracle();
  const auto& v = clip_vocab();
  ASSERT_EQ(o["cases"].size(), 50u);
  for (const auto& c : o["cases"]) {
    const auto text = c["text"].get<std::string>();
    auto seq = encode(v, text, 77);
    std::vector<TokenId> got(seq.ids().begin(), seq.ids().end());
    EXPECT_EQ(got, c["ids"].get<std::vector<TokenId>>()) << text;
    EXPECT_EQ(seq.eot_index(), c["eot_index"].get<std::size_t>()) << text;
    EXPECT_EQ(bpe_ids(v, normalize_text(text)), c["bpe_ids"].get<std::vector<TokenId>>()) << text;
  }
}

TEST(Tokenizer, KnownIds) {
  auto seq = encode(clip_vocab(), "Despair not cat");
  EXPECT_EQ(seq.ids()[0], 49406);
  EXPECT_EQ(seq.ids()[3], 2368);
  EXPECT_EQ(seq.eot_index(), 4u);
}

TEST(Tokenizer, EmptyTextIsStartEnd) {
  for (const char* t : {"", "   ", "\t\n"}) {
    auto seq = encode(clip_vocab(), t);
    EXPECT_EQ(seq.eot_index(), 1u);
    EXPECT_EQ(seq.ids()[0], 49406);
    EXPECT_EQ(seq.ids()[1], 49407);
  }
}

TEST(Tokenizer, TruncationKeepsEndMarker) {
  std::string text;
  for (int i = 0; i < 200; ++i) text += "word ";
  auto seq = encode(clip_vocab(), text, 20);
  EXPECT_EQ(seq.context_length(), 20u);
  EXPECT_EQ(seq.eot_index(), 19u);
  EXPECT_EQ(seq.ids()[19], 49407);
  EXPECT_NE(seq.ids()[18], 49407);
}

TEST(Tokenizer, ContextLengthTooSmall) {
  EXPECT_THROW(encode(clip_vocab(), "cat", 2), Error);
  EXPECT_NO_THROW(encode(clip_vocab(), "cat", 3));
}

TEST(Tokenizer, Normalization) {
  EXPECT_EQ(normalize_text("  Hello \t\n WORLD  "), "hello world");
  EXPECT_EQ(normalize_text("Cafe\xCC\x81"), "caf\xC3\xA9");
  EXPECT_EQ(normalize_text("\xC3\x89T\xC3\x89"), "\xC3\xA9t\xC3\xA9");
  EXPECT_EQ(normalize_text(""), "");
}

TEST(Tokenizer, NormalizedEquivalentsEncodeAlike) {
  const auto& v = clip_vocab();
  EXPECT_EQ(encode(v, "Draw  DESPAIR without\tcat"), encode(v, "draw despair without cat"));
  EXPECT_EQ(encode(v, "cafe\xCC\x81"), encode(v, "caf\xC3\xA9"));
}

TEST(Tokenizer, DecodeRoundTripsWordText) {
  const auto& v = clip_vocab();
  testing::UnitRng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto words = 1 + rng.below(6);
    for (std::uint64_t w = 0; w < words; ++w) {
      if (w) text += ' ';
      const auto len = 1 + rng.below(9);
      for (std::uint64_t i = 0; i < len; ++i) text += static_cast<char>('a' + rng.below(26));
    }
    auto seq = encode(v, text);
    EXPECT_EQ(decode(v, seq), text);
  }
}

TEST(Tokenizer, EncodeLayoutProperty) {
  const auto& v = clip_vocab();
  testing::UnitRng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const auto len = rng.below(120);
    for (std::uint64_t i = 0; i < len; ++i) text += static_cast<char>(32 + rng.below(95));
    const std::size_t ctx = 3 + rng.below(80);
    auto seq = encode(v, text, ctx);
    ASSERT_EQ(seq.context_length(), ctx);
    EXPECT_EQ(seq.ids()[0], v.start_of_text());
    EXPECT_EQ(seq.ids()[seq.eot_index()], v.end_of_text());
    for (std::size_t i = 1; i < seq.eot_index(); ++i) {
      EXPECT_NE(seq.ids()[i], v.end_of_text());
      EXPECT_NE(seq.ids()[i], v.start_of_text());
    }
    for (std::size_t i = seq.eot_index(); i < ctx; ++i) EXPECT_EQ(seq.ids()[i], v.pad());
    for (TokenId id : seq.ids()) EXPECT_LT(static_cast<std::size_t>(id), v.size());
  }
}

TEST(TokenSequence, FromIdsValidates) {
  EXPECT_NO_THROW(TokenSequence::from_ids({1, 5, 2, 2}, 1, 2));
  EXPECT_THROW(TokenSequence::from_ids({1, 2}, 1, 2), Error);
  EXPECT_THROW(TokenSequence::from_ids({5, 5, 2, 2}, 1, 2), Error);
  EXPECT_THROW(TokenSequence::from_ids({1, 5, 5, 5}, 1, 2), Error);
  EXPECT_THROW(TokenSequence::from_ids({1, 2, 5, 2}, 1, 2), Error);
  EXPECT_EQ(TokenSequence::from_ids({1, 5, 6, 2}, 1, 2).eot_index(), 3u);
}

TEST(Tokenizer, DecodeRejectsUnknownIds) {
  auto v = toy_vocab();
  auto seq = TokenSequence::from_ids({5, 99, 6, 6}, 5, 6);
  EXPECT_THROW(decode(v, seq), Error);
  EXPECT_EQ(decode(v, encode(v, "ab", 4)), "ab");
}

}  // namespace
}  // namespace negprobe
