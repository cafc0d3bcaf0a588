#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace negprobe {

// One benchmark row: an abstract word, its dictionary definition and the
// concrete word an attack tries to smuggle into the image. The optional
// synonym/hypernym annotate the abstract word for the negation probe.
struct WordTriple {
  std::string id;
  std::string w_abs;
  std::string w_abs_def;
  std::string w_con;
  std::optional<std::string> w_syn;
  std::optional<std::string> w_hyp;
};

struct ProbeWord {
  std::string w;
  std::optional<std::string> w_syn;
  std::optional<std::string> w_hyp;
};

struct Dataset {
  std::vector<WordTriple> triples;
  std::vector<ProbeWord> probe_words;  // one per distinct abstract word, first row wins
  std::filesystem::path source;
  std::size_t row_count = 0;
};

struct Violation {
  std::string kind;  // e.g. "duplicate pair"
  std::vector<std::string> row_ids;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

inline constexpr std::string_view kDatasetHeader = "id,w_abs,w_abs_def,w_con,w_syn,w_hyp";

// Parses without checking row invariants. Throws ParseError (with line
// number) on malformed CSV, Error("no rows") on a file with no data rows.
Dataset parse_dataset(std::string_view csv_text, std::filesystem::path source = {});
Dataset parse_dataset_file(const std::filesystem::path& path);

// Collects every invariant violation; never throws.
ValidationReport validate(const Dataset& dataset);

// parse_dataset_file + validate; throws Error naming the first offending row.
Dataset load_dataset(const std::filesystem::path& path);

std::string dataset_to_csv(const Dataset& dataset);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset);

std::vector<ProbeWord> probe_words_from(const std::vector<WordTriple>& triples);

}  // namespace negprobe
