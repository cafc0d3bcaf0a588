#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "negprobe/dataset.hpp"
#include "negprobe/embedding_algebra.hpp"
#include "negprobe/prompt_forge.hpp"
#include "negprobe/text_encoder.hpp"
#include "negprobe/tokenizer.hpp"

namespace negprobe {

// Text -> embedding. Must be safe to call from several threads at once.
using EmbedFn = std::function<Embedding(const std::string& text)>;

// Tokenize with the model's context length, then run the encoder.
EmbedFn make_embedder(const EncoderModel& model, const Vocabulary& vocab);

// Embeds each distinct text once, spreading work over `threads` workers
// (0 = hardware concurrency). Result does not depend on the thread count.
std::map<std::string, Embedding> embed_all(const EmbedFn& embed, std::vector<std::string> texts,
                                           std::size_t threads = 0);

struct ProbeOptions {
  PhraseTemplates phrases;
  std::string negation_word = "not";
  double bin_width = 0.05;
  std::size_t threads = 0;
};

struct ProbeRow {
  std::string label;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t n = 0;
  std::vector<double> values;         // one cosine per dataset pair
  std::vector<std::string> pair_ids;  // dataset row id for each value
};

struct ProbeReport {
  std::vector<ProbeRow> rows;  // "sub", "add", "add_not"
  double unit_scale = 1000.0;  // display multiplier only
};

enum class PairKind { negation, synonym, hypernym, double_negation };

inline constexpr PairKind kAllPairKinds[] = {PairKind::negation, PairKind::synonym,
                                             PairKind::hypernym, PairKind::double_negation};

std::string_view to_string(PairKind kind);

struct HistogramBin {
  double lower = 0.0;
  std::size_t count = 0;
};

struct HistogramCategory {
  PairKind kind = PairKind::negation;
  std::vector<double> samples;
  std::vector<std::string> words;  // base word for each sample
  std::vector<HistogramBin> bins;
};

struct HistogramReport {
  double bin_width = 0.05;
  double range_min = -1.0;
  double range_max = 1.0;
  std::vector<HistogramCategory> categories;

  const HistogramCategory& category(PairKind kind) const;
};

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;
};

SummaryStats summarize(const std::vector<double>& values);
double median(std::vector<double> values);

// Shared-edge histogram over [range_min, range_max]; values at the upper
// edge land in the last bin.
std::vector<HistogramBin> histogram(const std::vector<double>& values, double bin_width,
                                    double range_min = -1.0, double range_max = 1.0);

// For each (w_abs, w_con): S(f("{w_abs} not {w_con}"), composite) against
// f(w_abs) - f(w_con), f(w_abs) + f(w_con) and f(w_abs) + f(not) + f(w_con).
ProbeReport linearity_probe(const EmbedFn& embed, const Dataset& dataset,
                            const ProbeOptions& options = {});
ProbeReport linearity_probe(const EncoderModel& model, const Vocabulary& vocab,
                            const Dataset& dataset, const ProbeOptions& options = {});

// S(f(w), f(x)) for x in {"not w", w_syn, w_hyp, "not not w"}; words without a
// synonym or hypernym skip that category.
HistogramReport negation_similarity_probe(const EmbedFn& embed, const std::vector<ProbeWord>& words,
                                          const ProbeOptions& options = {});
HistogramReport negation_similarity_probe(const EncoderModel& model, const Vocabulary& vocab,
                                          const std::vector<ProbeWord>& words,
                                          const ProbeOptions& options = {});

// One CSV row per sentence: the sentence, then d_out values printed with 17
// significant digits. Returns the number of rows written.
std::size_t export_embeddings(const EmbedFn& embed, const std::vector<std::string>& sentences,
                              const std::filesystem::path& path, std::size_t threads = 0);
std::size_t export_embeddings(const EncoderModel& model, const Vocabulary& vocab,
                              const std::vector<std::string>& sentences,
                              const std::filesystem::path& path);

struct ExportedRow {
  std::string sentence;
  std::vector<double> values;
};
std::vector<ExportedRow> read_exported_embeddings(const std::filesystem::path& path);

nlohmann::json to_json(const ProbeReport& report);
ProbeReport probe_report_from_json(const nlohmann::json& j);
std::string to_csv(const ProbeReport& report);

nlohmann::json to_json(const HistogramReport& report);
HistogramReport histogram_report_from_json(const nlohmann::json& j);
std::string to_csv(const HistogramReport& report);

}  // namespace negprobe
