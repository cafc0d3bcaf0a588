#include "negprobe/probe_suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "negprobe/csv.hpp"
#include "negprobe/error.hpp"
#include "negprobe/text_util.hpp"

namespace negprobe {
namespace {

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

const Embedding& lookup(const std::map<std::string, Embedding>& cache, const std::string& text) {
  return cache.at(text);
}

ProbeRow make_row(std::string label, std::vector<double> values, std::vector<std::string> ids) {
  ProbeRow row;
  row.label = std::move(label);
  auto stats = summarize(values);
  row.mean = stats.mean;
  row.std = stats.std;
  row.n = values.size();
  row.values = std::move(values);
  row.pair_ids = std::move(ids);
  return row;
}

PairKind pair_kind_from_string(std::string_view s) {
  for (auto k : kAllPairKinds) {
    if (to_string(k) == s) return k;
  }
  throw Error("unknown pair kind: " + std::string(s));
}

}  // namespace

EmbedFn make_embedder(const EncoderModel& model, const Vocabulary& vocab) {
  return [&model, &vocab](const std::string& text) {
    return forward(model, encode(vocab, text, model.config.context_length), text);
  };
}

std::map<std::string, Embedding> embed_all(const EmbedFn& embed, std::vector<std::string> texts,
                                           std::size_t threads) {
  std::sort(texts.begin(), texts.end());
  texts.erase(std::unique(texts.begin(), texts.end()), texts.end());

  std::vector<Embedding> out(texts.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < texts.size(); i = next++) {
      try {
        out[i] = embed(texts[i]);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::make_exception_ptr(
              Error("encoding failure for '" + texts[i] + "': " + e.what()));
        }
        next = texts.size();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < worker_count(threads, texts.size()); ++t) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);

  std::map<std::string, Embedding> cache;
  for (std::size_t i = 0; i < texts.size(); ++i) cache.emplace(texts[i], std::move(out[i]));
  return cache;
}

std::string_view to_string(PairKind kind) {
  switch (kind) {
    case PairKind::negation:
      return "negation";
    case PairKind::synonym:
      return "synonym";
    case PairKind::hypernym:
      return "hypernym";
    case PairKind::double_negation:
      return "double_negation";
  }
  return "unknown";
}

const HistogramCategory& HistogramReport::category(PairKind kind) const {
  for (const auto& c : categories) {
    if (c.kind == kind) return c;
  }
  throw Error("histogram has no category " + std::string(to_string(kind)));
}

SummaryStats summarize(const std::vector<double>& values) {
  if (values.empty()) return {};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, double bin_width,
                                    double range_min, double range_max) {
  if (!(bin_width > 0.0) || !(range_max > range_min)) throw Error("invalid histogram range");
  const auto n_bins =
      static_cast<std::size_t>(std::llround(std::ceil((range_max - range_min) / bin_width - 1e-9)));
  std::vector<HistogramBin> bins(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lower = range_min + static_cast<double>(b) * bin_width;
  }
  for (double v : values) {
    double pos = std::floor((v - range_min) / bin_width);
    auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(n_bins - 1)));
    ++bins[b].count;
  }
  return bins;
}

ProbeReport linearity_probe(const EmbedFn& embed, const Dataset& dataset,
                            const ProbeOptions& options) {
  if (dataset.triples.empty()) throw Error("empty dataset");

  std::vector<std::string> texts{options.negation_word};
  std::vector<std::string> phrases;
  for (const auto& t : dataset.triples) {
    phrases.push_back(probe_phrase(PhraseKind::contrast, t.w_abs, t.w_con, options.phrases));
    texts.push_back(phrases.back());
    texts.push_back(t.w_abs);
    texts.push_back(t.w_con);
  }
  const auto cache = embed_all(embed, texts, options.threads);
  const Embedding& f_not = lookup(cache, options.negation_word);

  std::vector<double> sub, add, add_not;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < dataset.triples.size(); ++i) {
    const auto& t = dataset.triples[i];
    const Embedding& phrase = lookup(cache, phrases[i]);
    const Embedding& abs = lookup(cache, t.w_abs);
    const Embedding& con = lookup(cache, t.w_con);
    sub.push_back(cosine_similarity(phrase, linear_combine({{{1.0, abs}, {-1.0, con}}})));
    add.push_back(cosine_similarity(phrase, linear_combine({{{1.0, abs}, {1.0, con}}})));
    add_not.push_back(
        cosine_similarity(phrase, linear_combine({{{1.0, abs}, {1.0, f_not}, {1.0, con}}})));
    ids.push_back(t.id);
  }

  ProbeReport report;
  report.rows.push_back(make_row("sub", std::move(sub), ids));
  report.rows.push_back(make_row("add", std::move(add), ids));
  report.rows.push_back(make_row("add_not", std::move(add_not), std::move(ids)));
  return report;
}

ProbeReport linearity_probe(const EncoderModel& model, const Vocabulary& vocab,
                            const Dataset& dataset, const ProbeOptions& options) {
  return linearity_probe(make_embedder(model, vocab), dataset, options);
}

HistogramReport negation_similarity_probe(const EmbedFn& embed, const std::vector<ProbeWord>& words,
                                          const ProbeOptions& options) {
  if (words.empty()) throw Error("empty word list");

  auto negated = [&](const ProbeWord& w) {
    return probe_phrase(PhraseKind::negation, w.w, {}, options.phrases);
  };
  auto double_negated = [&](const ProbeWord& w) {
    return probe_phrase(PhraseKind::double_negation, w.w, {}, options.phrases);
  };

  std::vector<std::string> texts;
  for (const auto& w : words) {
    texts.push_back(w.w);
    texts.push_back(negated(w));
    texts.push_back(double_negated(w));
    if (w.w_syn) texts.push_back(*w.w_syn);
    if (w.w_hyp) texts.push_back(*w.w_hyp);
  }
  const auto cache = embed_all(embed, texts, options.threads);

  HistogramReport report;
  report.bin_width = options.bin_width;
  for (auto kind : kAllPairKinds) report.categories.push_back({kind, {}, {}, {}});
  auto record = [&](PairKind kind, const ProbeWord& w, const std::string& other) {
    auto& cat = report.categories[static_cast<std::size_t>(kind)];
    cat.samples.push_back(cosine_similarity(lookup(cache, w.w), lookup(cache, other)));
    cat.words.push_back(w.w);
  };
  for (const auto& w : words) {
    record(PairKind::negation, w, negated(w));
    if (w.w_syn) record(PairKind::synonym, w, *w.w_syn);
    if (w.w_hyp) record(PairKind::hypernym, w, *w.w_hyp);
    record(PairKind::double_negation, w, double_negated(w));
  }
  for (auto& cat : report.categories) {
    cat.bins = histogram(cat.samples, report.bin_width, report.range_min, report.range_max);
  }
  return report;
}

HistogramReport negation_similarity_probe(const EncoderModel& model, const Vocabulary& vocab,
                                          const std::vector<ProbeWord>& words,
                                          const ProbeOptions& options) {
  return negation_similarity_probe(make_embedder(model, vocab), words, options);
}

std::size_t export_embeddings(const EmbedFn& embed, const std::vector<std::string>& sentences,
                              const std::filesystem::path& path, std::size_t threads) {
  if (sentences.empty()) throw Error("no sentences to export");
  const auto cache = embed_all(embed, sentences, threads);

  std::string text;
  for (const auto& s : sentences) {
    text += csv::escape(s);
    for (double v : lookup(cache, s).values) {
      text.push_back(',');
      text += format_double(v);
    }
    text.push_back('\n');
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write embeddings: " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
  return sentences.size();
}

std::size_t export_embeddings(const EncoderModel& model, const Vocabulary& vocab,
                              const std::vector<std::string>& sentences,
                              const std::filesystem::path& path) {
  return export_embeddings(make_embedder(model, vocab), sentences, path);
}

std::vector<ExportedRow> read_exported_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embeddings: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::vector<ExportedRow> rows;
  for (const auto& rec : csv::parse(buf.str())) {
    ExportedRow row;
    row.sentence = rec.fields.at(0);
    for (std::size_t i = 1; i < rec.fields.size(); ++i) {
      const auto& f = rec.fields[i];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError("bad number '" + f + "'", rec.line);
      }
      row.values.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const ProbeReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"label", r.label},
                    {"mean", r.mean},
                    {"std", r.std},
                    {"n", r.n},
                    {"values", r.values},
                    {"pair_ids", r.pair_ids}});
  }
  return {{"schema", "probe_report"}, {"unit_scale", report.unit_scale}, {"rows", rows}};
}

ProbeReport probe_report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema") != "probe_report") throw Error("not a probe report");
    ProbeReport report;
    report.unit_scale = j.at("unit_scale").get<double>();
    for (const auto& r : j.at("rows")) {
      ProbeRow row;
      row.label = r.at("label").get<std::string>();
      row.mean = r.at("mean").get<double>();
      row.std = r.at("std").get<double>();
      row.n = r.at("n").get<std::size_t>();
      row.values = r.value("values", std::vector<double>{});
      row.pair_ids = r.value("pair_ids", std::vector<std::string>{});
      report.rows.push_back(std::move(row));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed probe report: ") + e.what());
  }
}

std::string to_csv(const ProbeReport& report) {
  std::string out = "label,mean,std,n,mean_display,std_display\n";
  for (const auto& r : report.rows) {
    out += csv::join({r.label, format_double(r.mean), format_double(r.std), std::to_string(r.n),
                      format_double(r.mean * report.unit_scale),
                      format_double(r.std * report.unit_scale)});
    out.push_back('\n');
  }
  return out;
}

nlohmann::json to_json(const HistogramReport& report) {
  nlohmann::json cats = nlohmann::json::array();
  for (const auto& c : report.categories) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : c.bins) bins.push_back({{"lower", b.lower}, {"count", b.count}});
    cats.push_back(
        {{"kind", to_string(c.kind)}, {"samples", c.samples}, {"words", c.words}, {"bins", bins}});
  }
  return {{"schema", "histogram_report"},
          {"bin_width", report.bin_width},
          {"range", {report.range_min, report.range_max}},
          {"categories", cats}};
}

HistogramReport histogram_report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema") != "histogram_report") throw Error("not a histogram report");
    HistogramReport report;
    report.bin_width = j.at("bin_width").get<double>();
    report.range_min = j.at("range").at(0).get<double>();
    report.range_max = j.at("range").at(1).get<double>();
    for (const auto& c : j.at("categories")) {
      HistogramCategory cat;
      cat.kind = pair_kind_from_string(c.at("kind").get<std::string>());
      cat.samples = c.at("samples").get<std::vector<double>>();
      cat.words = c.value("words", std::vector<std::string>{});
      for (const auto& b : c.at("bins")) {
        cat.bins.push_back({b.at("lower").get<double>(), b.at("count").get<std::size_t>()});
      }
      report.categories.push_back(std::move(cat));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed histogram report: ") + e.what());
  }
}

std::string to_csv(const HistogramReport& report) {
  std::string out = "kind,lower,upper,count\n";
  for (const auto& c : report.categories) {
    for (const auto& b : c.bins) {
      out += csv::join({std::string(to_string(c.kind)), format_double(b.lower, 6),
                        format_double(b.lower + report.bin_width, 6), std::to_string(b.count)});
      out.push_back('\n');
    }
  }
  return out;
}

}  // namespace negprobe
