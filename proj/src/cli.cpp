#include "negprobe/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "negprobe/campaign.hpp"
#include "negprobe/dataset.hpp"
#include "negprobe/error.hpp"
#include "negprobe/probe_suite.hpp"
#include "negprobe/prompt_forge.hpp"
#include "negprobe/report.hpp"
#include "negprobe/text_encoder.hpp"
#include "negprobe/text_util.hpp"
#include "negprobe/tokenizer.hpp"

#ifndef NEGPROBE_DEFAULT_VOCAB
#define NEGPROBE_DEFAULT_VOCAB "data/clip_vocab.txt"
#endif

namespace negprobe::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path csv_sibling(const fs::path& json_path) {
  fs::path p = json_path;
  p.replace_extension(".csv");
  if (p == json_path) p += ".csv";
  return p;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

std::uint64_t effective_seed(std::uint64_t flag_value) {
  const char* env = std::getenv("NEGPROBE_SEED");
  if (env == nullptr || *env == '\0') return flag_value;
  std::uint64_t seed = 0;
  std::string_view s(env);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("NEGPROBE_SEED must be a non-negative integer, got '" + std::string(s) + "'");
  }
  return seed;
}

struct ModelInputs {
  std::string weights;
  std::string vocab = NEGPROBE_DEFAULT_VOCAB;
  std::size_t threads = 0;
};

void add_model_options(CLI::App* cmd, ModelInputs& in) {
  cmd->add_option("--weights", in.weights, "Encoder weights (tensor container)")->required();
  cmd->add_option("--vocab", in.vocab, "BPE vocabulary file")->capture_default_str();
  cmd->add_option("--threads", in.threads, "Worker threads (0 = all cores)");
}

struct Session {
  EncoderModel model;
  Vocabulary vocab;
};

Session open_session(const ModelInputs& in) {
  Session s{load_weights(in.weights), load_vocab(in.vocab)};
  if (s.vocab.size() > s.model.config.vocab_size) {
    throw Error("vocabulary has " + std::to_string(s.vocab.size()) +
                " tokens but the model embeds only " + std::to_string(s.model.config.vocab_size));
  }
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"negprobe: negation probes, prompt forging and campaign scoring for text encoders",
               "negprobe"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // tokenize
  std::string vocab_path = NEGPROBE_DEFAULT_VOCAB;
  std::string text;
  std::size_t context_length = kDefaultContextLength;
  auto* tokenize_cmd = app.add_subcommand("tokenize", "Print token ids for a text");
  tokenize_cmd->add_option("--vocab", vocab_path, "BPE vocabulary file")->capture_default_str();
  tokenize_cmd->add_option("--text", text, "Text to tokenize")->required();
  tokenize_cmd->add_option("--context-length", context_length, "Sequence length")
      ->capture_default_str();

  // encode
  ModelInputs encode_in;
  std::string encode_out;
  auto* encode_cmd = app.add_subcommand("encode", "Print the pooled embedding of a text");
  add_model_options(encode_cmd, encode_in);
  encode_cmd->add_option("--text", text, "Text to encode")->required();
  encode_cmd->add_option("--out", encode_out, "Write the embedding as JSON here");

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "Representation-space probes");
  probe_cmd->require_subcommand(1);
  ModelInputs probe_in;
  std::string dataset_path, out_path, sentences_path;
  ProbeOptions probe_opts;
  auto* linearity_cmd =
      probe_cmd->add_subcommand("linearity", "Compare '{w_abs} not {w_con}' with embedding sums");
  auto* negation_cmd =
      probe_cmd->add_subcommand("negation", "Similarity of w to 'not w', synonym, hypernym");
  auto* export_cmd = probe_cmd->add_subcommand("export", "Write sentence embeddings as CSV");
  for (auto* cmd : {linearity_cmd, negation_cmd, export_cmd}) {
    add_model_options(cmd, probe_in);
    cmd->add_option("--out", out_path, "Output file")->required();
  }
  linearity_cmd->add_option("--dataset", dataset_path, "Dataset CSV")->required();
  linearity_cmd->add_option("--phrase-template", probe_opts.phrases.contrast,
                            "Phrase pattern with {w1} and {w2}")
      ->capture_default_str();
  negation_cmd->add_option("--dataset", dataset_path, "Dataset CSV with w_syn/w_hyp")->required();
  negation_cmd->add_option("--bin-width", probe_opts.bin_width, "Histogram bin width")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  negation_cmd->add_option("--negation-template", probe_opts.phrases.negation,
                           "Negated phrase pattern with {w1}")
      ->capture_default_str();
  negation_cmd->add_option("--double-negation-template", probe_opts.phrases.double_negation,
                           "Doubly negated phrase pattern with {w1}")
      ->capture_default_str();
  auto* export_source = export_cmd->add_option_group("source");
  export_source->add_option("--sentences", sentences_path, "Text file, one sentence per line");
  export_source->add_option("--dataset", dataset_path,
                            "Dataset CSV; exports w_abs, '{w_abs} not {w_con}' and attack prompts");
  export_source->require_option(1);

  // forge
  auto* forge_cmd = app.add_subcommand("forge", "Render attack and defense prompts");
  forge_cmd->require_subcommand(1);
  std::uint64_t seed = 0;
  bool raw_definition = false;
  std::string include_word;
  auto* attack_cmd = forge_cmd->add_subcommand("attack", "draw {w_abs} without {w_con}");
  auto* defend_def_cmd =
      forge_cmd->add_subcommand("defend-def", "draw {w_abs}, which is {def}, without {w_con}");
  auto* defend_sub_cmd =
      forge_cmd->add_subcommand("defend-sub", "draw {w_abs}, include {w_con1}, instead of {w_con2}");
  for (auto* cmd : {attack_cmd, defend_def_cmd, defend_sub_cmd}) {
    cmd->add_option("--dataset", dataset_path, "Dataset CSV")->required();
    cmd->add_option("--out", out_path, "Output JSON-lines file")->required();
    cmd->add_option("--seed", seed, "Sampling seed (NEGPROBE_SEED overrides)")
        ->capture_default_str();
  }
  defend_def_cmd->add_flag("--raw", raw_definition, "Insert the definition verbatim");
  defend_sub_cmd->add_option("--include", include_word,
                             "Substitute concrete word (default: sampled from another row)");

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "Dataset utilities");
  dataset_cmd->require_subcommand(1);
  auto* validate_cmd = dataset_cmd->add_subcommand("validate", "Report every invariant violation");
  validate_cmd->add_option("--path", dataset_path, "Dataset CSV")->required();

  // campaign
  auto* campaign_cmd = app.add_subcommand("campaign", "Run prompts against an endpoint and score");
  campaign_cmd->require_subcommand(1);
  std::string cases_path, endpoint, manifest_path, labels_path;
  CampaignOptions campaign_opts;
  long long timeout_ms = campaign_opts.timeout.count();
  long long backoff_ms = campaign_opts.initial_backoff.count();
  auto* run_cmd = campaign_cmd->add_subcommand("run", "POST every case and write a manifest");
  run_cmd->add_option("--cases", cases_path, "PromptCase JSON-lines file")->required();
  run_cmd->add_option("--endpoint", endpoint, "http://host:port/path")->required();
  run_cmd->add_option("--concurrency", campaign_opts.concurrency, "Max requests in flight")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", out_path, "Campaign directory")->required();
  run_cmd->add_option("--timeout-ms", timeout_ms, "Per-request timeout")->capture_default_str();
  run_cmd->add_option("--backoff-ms", backoff_ms, "First retry delay; doubles per retry")
      ->capture_default_str();
  run_cmd->add_option("--max-attempts", campaign_opts.max_attempts, "Attempts per case")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* report_cmd = campaign_cmd->add_subcommand("report", "Join labels and compute success rates");
  report_cmd->add_option("--manifest", manifest_path, "manifest.jsonl")->required();
  report_cmd->add_option("--labels", labels_path, "Labels CSV")->required();
  report_cmd->add_option("--out", out_path, "RateReport JSON")->required();

  // render
  std::string report_path, format = "table";
  auto* render_cmd = app.add_subcommand("render", "Render a saved report as a table or CSV");
  render_cmd->add_option("--report", report_path, "Report JSON")->required();
  render_cmd->add_option("--format", format, "table or csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"table", "csv"}));

  std::vector<const char*> argv{"negprobe"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }

  try {
    if (tokenize_cmd->parsed()) {
      auto vocab = load_vocab(vocab_path);
      auto seq = encode(vocab, text, context_length);
      for (std::size_t i = 0; i < seq.context_length(); ++i) {
        out << (i ? " " : "") << seq.ids()[i];
      }
      out << "\neot_index " << seq.eot_index() << "\n";
      return kSuccess;
    }

    if (encode_cmd->parsed()) {
      auto s = open_session(encode_in);
      auto e = forward(s.model, encode(s.vocab, text, s.model.config.context_length), text);
      nlohmann::json j = {{"text", text}, {"values", e.values}};
      if (!encode_out.empty()) write_json(encode_out, j);
      out << j["values"].dump() << "\n";
      return kSuccess;
    }

    if (linearity_cmd->parsed()) {
      auto s = open_session(probe_in);
      auto ds = load_dataset(dataset_path);
      probe_opts.threads = probe_in.threads;
      auto report = linearity_probe(s.model, s.vocab, ds, probe_opts);
      write_json(out_path, to_json(report));
      write_text(csv_sibling(out_path), to_csv(report));
      out << render_report(to_json(report), ReportFormat::table);
      return kSuccess;
    }

    if (negation_cmd->parsed()) {
      auto s = open_session(probe_in);
      auto ds = load_dataset(dataset_path);
      probe_opts.threads = probe_in.threads;
      auto report = negation_similarity_probe(s.model, s.vocab, ds.probe_words, probe_opts);
      write_json(out_path, to_json(report));
      write_text(csv_sibling(out_path), to_csv(report));
      out << render_report(to_json(report), ReportFormat::table);
      return kSuccess;
    }

    if (export_cmd->parsed()) {
      auto s = open_session(probe_in);
      std::vector<std::string> sentences;
      if (!sentences_path.empty()) {
        sentences = read_lines(sentences_path);
      } else {
        for (const auto& t : load_dataset(dataset_path).triples) {
          sentences.push_back(t.w_abs);
          sentences.push_back(probe_phrase(PhraseKind::contrast, t.w_abs, t.w_con));
          sentences.push_back(attack_prompt(t).rendered);
        }
      }
      auto n = export_embeddings(make_embedder(s.model, s.vocab), sentences, out_path,
                                 probe_in.threads);
      out << "wrote " << n << " rows x " << s.model.config.d_out << " values to " << out_path
          << "\n";
      return kSuccess;
    }

    if (attack_cmd->parsed() || defend_def_cmd->parsed() || defend_sub_cmd->parsed()) {
      auto ds = load_dataset(dataset_path);
      std::vector<PromptCase> cases;
      if (attack_cmd->parsed()) {
        for (const auto& t : ds.triples) cases.push_back(attack_prompt(t));
      } else if (defend_def_cmd->parsed()) {
        auto style = raw_definition ? DefinitionStyle::raw : DefinitionStyle::inline_clause;
        for (const auto& t : ds.triples) cases.push_back(defense_definition_prompt(t, style));
      } else {
        std::optional<std::string> include;
        if (!include_word.empty()) include = include_word;
        cases = substitution_cases(ds, effective_seed(seed), include);
      }
      write_cases(out_path, cases);
      out << "wrote " << cases.size() << " prompt cases to " << out_path << "\n";
      return kSuccess;
    }

    if (validate_cmd->parsed()) {
      auto ds = parse_dataset_file(dataset_path);
      auto report = validate(ds);
      if (report.ok()) {
        out << dataset_path << ": " << ds.row_count << " rows, " << ds.probe_words.size()
            << " probe words, no violations\n";
        return kSuccess;
      }
      for (const auto& v : report.violations) {
        out << v.kind << ": " << v.message << "\n";
      }
      err << dataset_path << ": " << report.violations.size() << " violation(s)\n";
      return kOperationalFailure;
    }

    if (run_cmd->parsed()) {
      campaign_opts.timeout = std::chrono::milliseconds(timeout_ms);
      campaign_opts.initial_backoff = std::chrono::milliseconds(backoff_ms);
      auto cases = read_cases(cases_path);
      auto manifest = run_campaign(cases, endpoint, campaign_opts, out_path);
      std::size_t ok = 0;
      for (const auto& r : manifest) ok += r.success ? 1 : 0;
      out << "cases " << manifest.size() << ", succeeded " << ok << ", failed "
          << manifest.size() - ok << "\nmanifest " << (fs::path(out_path) / "manifest.jsonl").string()
          << "\n";
      return kSuccess;
    }

    if (report_cmd->parsed()) {
      auto manifest = read_manifest(manifest_path);
      auto labeled = ingest_labels(manifest, fs::path(labels_path));
      auto report = success_rates(labeled);
      write_json(out_path, to_json(report));
      out << render_report(to_json(report), ReportFormat::table);
      return kSuccess;
    }

    if (render_cmd->parsed()) {
      out << render_report(fs::path(report_path), report_format_from_string(format));
      return kSuccess;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kOperationalFailure;
  }
  err << app.help();
  return kUsageError;
}

}  // namespace negprobe::cli
