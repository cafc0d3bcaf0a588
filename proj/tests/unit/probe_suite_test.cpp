#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "negprobe/error.hpp"
#include "negprobe/probe_suite.hpp"
#include "support/temp_dir.hpp"
#include "support/tiny_fixture.hpp"

namespace negprobe {
namespace {

constexpr std::size_t kDim = 16;

std::vector<double> word_vector(const std::string& w) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : w) h = (h ^ c) * 1099511628211ull;
  testing::UnitRng rng(h);
  std::vector<double> v(kDim);
  for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
  return v;
}

// Bag-of-words stand-in: a sentence embeds as the sum of its word vectors.
Embedding bag(const std::string& text) {
  std::vector<double> v(kDim, 0.0);
  std::istringstream in(text);
  std::string w;
  while (in >> w) {
    auto wv = word_vector(w);
    for (std::size_t i = 0; i < kDim; ++i) v[i] += wv[i];
  }
  return {v, text};
}

double naive_cos(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

std::vector<double> axpy(const std::vector<double>& a, double k, const std::vector<double>& b) {
  auto out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += k * b[i];
  return out;
}

const Dataset& words() {
  static const Dataset d = load_dataset(testing::source_path("data/probe_words.csv"));
  return d;
}

TEST(Stats, SummarizeAndMedian) {
  auto s = summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_DOUBLE_EQ(summarize({7}).std, 0.0);
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), Error);
}

TEST(Stats, HistogramEdges) {
  auto bins = histogram({-1.0, -0.95, 0.0, 0.049, 0.05, 1.0}, 0.05);
  ASSERT_EQ(bins.size(), 40u);
  EXPECT_DOUBLE_EQ(bins[0].lower, -1.0);
  EXPECT_EQ(bins[0].count, 1u);
  EXPECT_EQ(bins[1].count, 1u);
  EXPECT_EQ(bins[20].count, 2u);
  EXPECT_EQ(bins[21].count, 1u);
  EXPECT_EQ(bins[39].count, 1u);
  EXPECT_THROW(histogram({0.0}, 0.0), Error);
}

TEST(Probe, LinearityMatchesBagOfWordsOracle) {
  auto report = linearity_probe(bag, words());
  ASSERT_EQ(report.rows.size(), 3u);
  EXPECT_EQ(report.rows[0].label, "sub");
  EXPECT_EQ(report.rows[1].label, "add");
  EXPECT_EQ(report.rows[2].label, "add_not");
  EXPECT_DOUBLE_EQ(report.unit_scale, 1000.0);
  const auto n = words().triples.size();
  const auto not_vec = word_vector("not");
  std::vector<double> sub, add;
  for (const auto& t : words().triples) {
    auto a = bag(t.w_abs).values, c = bag(t.w_con).values;
    auto phrase = bag(t.w_abs + " not " + t.w_con).values;
    sub.push_back(naive_cos(phrase, axpy(a, -1, c)));
    add.push_back(naive_cos(phrase, axpy(a, 1, c)));
    // With a bag-of-words encoder the not-sum reproduces the phrase exactly.
    EXPECT_NEAR(naive_cos(phrase, axpy(axpy(a, 1, not_vec), 1, c)), 1.0, 1e-12);
  }
  for (const auto& row : report.rows) {
    ASSERT_EQ(row.n, n);
    ASSERT_EQ(row.values.size(), n);
    ASSERT_EQ(row.pair_ids.size(), n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_NEAR(report.rows[0].values[i], sub[i], 1e-12);
    EXPECT_NEAR(report.rows[1].values[i], add[i], 1e-12);
    EXPECT_NEAR(report.rows[2].values[i], 1.0, 1e-12);
    EXPECT_EQ(report.rows[0].pair_ids[i], words().triples[i].id);
  }
  EXPECT_NEAR(report.rows[0].mean, summarize(sub).mean, 1e-12);
  EXPECT_NEAR(report.rows[1].std, summarize(add).std, 1e-12);
  EXPECT_NEAR(report.rows[2].std, 0.0, 1e-12);
  EXPECT_GT(report.rows[2].mean, report.rows[1].mean);
}

TEST(ProbeProperty, LinearityPermutationAndThreadInvariant) {
  auto base = linearity_probe(bag, words(), {.threads = 1});
  testing::UnitRng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Dataset shuffled = words();
    auto& t = shuffled.triples;
    for (std::size_t i = t.size(); i > 1; --i) std::swap(t[i - 1], t[rng.below(i)]);
    ProbeOptions opts;
    opts.threads = 1 + rng.below(8);
    auto r = linearity_probe(bag, shuffled, opts);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_NEAR(r.rows[k].mean, base.rows[k].mean, 1e-12);
      EXPECT_NEAR(r.rows[k].std, base.rows[k].std, 1e-12);
      auto a = r.rows[k].values, b = base.rows[k].values;
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      EXPECT_EQ(a, b);
    }
  }
}

TEST(Probe, NegationSimilarityMatchesOracle) {
  auto report = negation_similarity_probe(bag, words().probe_words);
  EXPECT_DOUBLE_EQ(report.bin_width, 0.05);
  const auto& neg = report.category(PairKind::negation);
  const auto& syn = report.category(PairKind::synonym);
  const auto& dbl = report.category(PairKind::double_negation);
  ASSERT_EQ(neg.samples.size(), words().probe_words.size());
  std::size_t with_syn = 0;
  for (const auto& w : words().probe_words) with_syn += w.w_syn ? 1 : 0;
  EXPECT_EQ(syn.samples.size(), with_syn);
  for (std::size_t i = 0; i < neg.samples.size(); ++i) {
    const auto& w = words().probe_words[i].w;
    EXPECT_EQ(neg.words[i], w);
    EXPECT_NEAR(neg.samples[i], naive_cos(bag(w).values, bag("not " + w).values), 1e-12);
    EXPECT_NEAR(dbl.samples[i], naive_cos(bag(w).values, bag("not not " + w).values), 1e-12);
  }
  for (const auto& c : report.categories) {
    std::size_t total = 0;
    for (const auto& b : c.bins) total += b.count;
    EXPECT_EQ(total, c.samples.size());
    EXPECT_EQ(c.bins.size(), 40u);
  }
}

TEST(Probe, CustomTemplatesAndErrors) {
  ProbeOptions opts;
  opts.phrases.negation = "no {w1}";
  auto r = negation_similarity_probe(bag, {{"cat", {}, {}}}, opts);
  EXPECT_NEAR(r.category(PairKind::negation).samples[0],
              naive_cos(bag("cat").values, bag("no cat").values), 1e-12);
  EXPECT_TRUE(r.category(PairKind::synonym).samples.empty());
  EXPECT_THROW(negation_similarity_probe(bag, {}), Error);
  EXPECT_THROW(linearity_probe(bag, Dataset{}), Error);
  EmbedFn failing = [](const std::string& t) -> Embedding {
    if (t == "not cat") throw Error("boom");
    return bag(t);
  };
  try {
    negation_similarity_probe(failing, {{"cat", {}, {}}});
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("encoding failure for 'not cat'"), std::string::npos);
  }
}

TEST(Probe, EmbedAllDeduplicates) {
  std::atomic<int> calls{0};
  EmbedFn counting = [&](const std::string& t) {
    ++calls;
    return bag(t);
  };
  auto m = embed_all(counting, {"a b", "c", "a b", "c", "d"}, 4);
  EXPECT_EQ(calls.load(), 3);
  EXPECT_EQ(m.size(), 3u);
  EXPECT_EQ(m.at("a b").source_text, "a b");
}

TEST(Probe, ReportJsonAndCsv) {
  auto r = linearity_probe(bag, words());
  auto back = probe_report_from_json(to_json(r));
  ASSERT_EQ(back.rows.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back.rows[k].values, r.rows[k].values);
    EXPECT_EQ(back.rows[k].mean, r.rows[k].mean);
  }
  EXPECT_EQ(to_csv(r).substr(0, to_csv(r).find('\n')).find("label"), 0u);
  auto h = negation_similarity_probe(bag, words().probe_words);
  auto hb = histogram_report_from_json(to_json(h));
  EXPECT_EQ(hb.category(PairKind::hypernym).samples, h.category(PairKind::hypernym).samples);
  EXPECT_THROW(probe_report_from_json(to_json(h)), Error);
}

TEST(Probe, ExportRoundTripsExactly) {
  testing::TempDir dir;
  std::vector<std::string> sentences{"despair", "despair not cat", "draw \"x\", y"};
  EXPECT_EQ(export_embeddings(bag, sentences, dir / "e.csv", 2), 3u);
  auto rows = read_exported_embeddings(dir / "e.csv");
  ASSERT_EQ(rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(rows[i].sentence, sentences[i]);
    EXPECT_EQ(rows[i].values, bag(sentences[i]).values);
  }
  EXPECT_THROW(export_embeddings(bag, {}, dir / "x.csv"), Error);
}

TEST(Probe, TinyModelEndToEnd) {
  testing::TempDir dir;
  auto model = load_weights(testing::write_tiny_fixture(dir / "m.bin"));
  auto vocab = load_vocab(testing::write_tiny_vocab(dir / "v.txt"));
  auto ds = parse_dataset(
      "id,w_abs,w_abs_def,w_con,w_syn,w_hyp\n"
      "r1,ab,d,ba,aab,b\n"
      "r2,aab,d,x,ab,\n"
      "r3,c,d,bab,,a\n");
  auto r = linearity_probe(model, vocab, ds, {.threads = 2});
  EXPECT_EQ(r.rows[0].n, 3u);
  auto embed = make_embedder(model, vocab);
  auto phrase = embed("ab not ba").values;
  EXPECT_NEAR(r.rows[0].values[0],
              naive_cos(phrase, axpy(embed("ab").values, -1, embed("ba").values)), 1e-12);
  auto h = negation_similarity_probe(model, vocab, ds.probe_words);
  EXPECT_EQ(h.category(PairKind::synonym).samples.size(), 2u);
  EXPECT_EQ(h.category(PairKind::hypernym).samples.size(), 2u);
}

}  // namespace
}  // namespace negprobe
