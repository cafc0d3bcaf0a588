#include "negprobe/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "negprobe/csv.hpp"
#include "negprobe/error.hpp"
#include "negprobe/text_util.hpp"

namespace negprobe {
namespace {

constexpr std::size_t kRequiredColumns = 4;
const std::vector<std::string> kColumns = {"id", "w_abs", "w_abs_def", "w_con", "w_syn", "w_hyp"};

std::optional<std::string> optional_field(const std::vector<std::string>& fields, std::size_t i) {
  if (i >= fields.size()) return std::nullopt;
  std::string v = trim(fields[i]);
  if (v.empty()) return std::nullopt;
  return v;
}

}  // namespace

std::vector<ProbeWord> probe_words_from(const std::vector<WordTriple>& triples) {
  std::vector<ProbeWord> words;
  std::set<std::string> seen;
  for (const auto& t : triples) {
    if (t.w_abs.empty() || !seen.insert(ascii_lower(t.w_abs)).second) continue;
    words.push_back({t.w_abs, t.w_syn, t.w_hyp});
  }
  return words;
}

Dataset parse_dataset(std::string_view csv_text, std::filesystem::path source) {
  auto records = csv::parse(csv_text);
  if (records.empty()) throw Error("no rows");

  const auto& header = records.front();
  std::vector<std::string> names;
  for (const auto& f : header.fields) names.push_back(trim(f));
  if (names.size() < kRequiredColumns || names.size() > kColumns.size() ||
      !std::equal(names.begin(), names.end(), kColumns.begin())) {
    throw ParseError("expected header '" + std::string(kDatasetHeader) + "'", header.line);
  }

  Dataset ds;
  ds.source = std::move(source);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() < kRequiredColumns || rec.fields.size() > names.size()) {
      throw ParseError("expected " + std::to_string(kRequiredColumns) + " to " +
                           std::to_string(names.size()) + " fields, got " +
                           std::to_string(rec.fields.size()),
                       rec.line);
    }
    WordTriple t;
    t.id = trim(rec.fields[0]);
    t.w_abs = trim(rec.fields[1]);
    t.w_abs_def = trim(rec.fields[2]);
    t.w_con = trim(rec.fields[3]);
    t.w_syn = optional_field(rec.fields, 4);
    t.w_hyp = optional_field(rec.fields, 5);
    ds.triples.push_back(std::move(t));
  }
  if (ds.triples.empty()) throw Error("no rows");
  ds.row_count = ds.triples.size();
  ds.probe_words = probe_words_from(ds.triples);
  return ds;
}

Dataset parse_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), path);
}

ValidationReport validate(const Dataset& dataset) {
  ValidationReport report;
  auto add = [&](std::string kind, std::vector<std::string> ids, std::string message) {
    report.violations.push_back({std::move(kind), std::move(ids), std::move(message)});
  };

  std::map<std::string, std::string> first_id;
  std::map<std::pair<std::string, std::string>, std::string> first_pair;
  for (std::size_t i = 0; i < dataset.triples.size(); ++i) {
    const auto& t = dataset.triples[i];
    const std::string label = t.id.empty() ? "#" + std::to_string(i + 1) : t.id;

    for (auto [name, value] : {std::pair<const char*, const std::string*>{"id", &t.id},
                               {"w_abs", &t.w_abs},
                               {"w_abs_def", &t.w_abs_def},
                               {"w_con", &t.w_con}}) {
      if (trim(*value).empty()) {
        add("empty field", {label}, "row " + label + ": " + name + " is empty");
      }
    }
    const std::string abs = ascii_lower(trim(t.w_abs));
    const std::string con = ascii_lower(trim(t.w_con));
    if (!abs.empty() && abs == con) {
      add("abstract equals concrete", {label},
          "row " + label + ": abstract and concrete word are both '" + t.w_abs + "'");
    }
    if (t.w_syn && ascii_lower(trim(*t.w_syn)) == abs) {
      add("synonym equals word", {label}, "row " + label + ": synonym repeats the word");
    }
    if (t.w_hyp && ascii_lower(trim(*t.w_hyp)) == abs) {
      add("hypernym equals word", {label}, "row " + label + ": hypernym repeats the word");
    }
    if (!t.id.empty()) {
      auto [it, inserted] = first_id.emplace(t.id, label);
      if (!inserted) add("duplicate id", {it->second, label}, "row id '" + t.id + "' repeats");
    }
    if (!abs.empty() && !con.empty()) {
      auto [it, inserted] = first_pair.emplace(std::pair{abs, con}, label);
      if (!inserted) {
        add("duplicate pair", {it->second, label},
            "rows " + it->second + " and " + label + " share the pair (" + t.w_abs + ", " +
                t.w_con + ")");
      }
    }
  }
  return report;
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset ds = parse_dataset_file(path);
  ValidationReport report = validate(ds);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    throw Error("invalid dataset " + path.string() + ": " + v.kind + ": " + v.message);
  }
  return ds;
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out(kDatasetHeader);
  out.push_back('\n');
  for (const auto& t : dataset.triples) {
    out += csv::join({t.id, t.w_abs, t.w_abs_def, t.w_con, t.w_syn.value_or(""),
                      t.w_hyp.value_or("")});
    out.push_back('\n');
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset: " + path.string());
  out << dataset_to_csv(dataset);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace negprobe
