#include "negprobe/campaign.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "negprobe/csv.hpp"
#include "negprobe/error.hpp"
#include "negprobe/text_util.hpp"

namespace negprobe {
namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& uri) {
  constexpr std::string_view scheme = "http://";
  if (!std::string_view(uri).starts_with(scheme)) {
    throw Error("endpoint must be an http:// uri: " + uri);
  }
  auto slash = uri.find('/', scheme.size());
  Endpoint e;
  e.origin = uri.substr(0, slash);
  e.path = slash == std::string::npos ? "/" : uri.substr(slash);
  if (e.origin.size() == scheme.size()) throw Error("endpoint has no host: " + uri);
  return e;
}

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

std::optional<std::string> base64_decode(std::string_view in) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(alphabet[i])] = i;
    return t;
  }();
  std::string out;
  int bits = 0;
  std::uint32_t buffer = 0;
  std::size_t padding = 0;
  for (char c : in) {
    if (c == '=') {
      ++padding;
      continue;
    }
    if (c == '\n' || c == '\r') continue;
    int v = table[static_cast<unsigned char>(c)];
    if (v < 0 || padding > 0) return std::nullopt;
    buffer = (buffer << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
    }
  }
  if (padding > 2 || out.empty()) return std::nullopt;
  return out;
}

bool looks_like_uri(std::string_view s) {
  return s.find("://") != std::string_view::npos || s.starts_with("data:");
}

bool is_transient(int status) { return status == 429 || (status >= 500 && status <= 599); }

struct Attempt {
  enum class Kind { success, transient, permanent } kind;
  std::string image;   // on success
  std::string reason;  // on failure
};

Attempt post_once(httplib::Client& client, const std::string& path, const std::string& body) {
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Connection || err == httplib::Error::ConnectionTimeout) {
      return {Attempt::Kind::transient, {}, "connect"};
    }
    if (err == httplib::Error::Read || err == httplib::Error::Write) {
      return {Attempt::Kind::transient, {}, "timeout"};
    }
    return {Attempt::Kind::transient, {}, "transport: " + httplib::to_string(err)};
  }
  if (res->status != 200) {
    return {is_transient(res->status) ? Attempt::Kind::transient : Attempt::Kind::permanent,
            {},
            "http " + std::to_string(res->status)};
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    auto image = j.at("image").get<std::string>();
    if (image.empty()) return {Attempt::Kind::permanent, {}, "bad response: empty image"};
    return {Attempt::Kind::success, std::move(image), {}};
  } catch (const nlohmann::json::exception&) {
    return {Attempt::Kind::permanent, {}, "bad response"};
  }
}

CampaignRecord run_case(httplib::Client& client, const Endpoint& endpoint,
                        const CampaignOptions& options, const std::filesystem::path& out_dir,
                        const PromptCase& prompt, std::size_t index) {
  CampaignRecord rec;
  rec.record_id = record_id_for(index);
  rec.prompt = prompt;
  rec.request_time = utc_now();
  const std::string body = nlohmann::json{{"prompt", prompt.rendered}}.dump();

  Attempt last{Attempt::Kind::transient, {}, "not attempted"};
  auto wait = options.initial_backoff;
  for (int attempt = 1; attempt <= std::max(1, options.max_attempts); ++attempt) {
    rec.attempts = attempt;
    last = post_once(client, endpoint.path, body);
    if (last.kind != Attempt::Kind::transient) break;
    if (attempt < options.max_attempts) {
      std::this_thread::sleep_for(wait);
      wait *= 2;
    }
  }
  if (last.kind != Attempt::Kind::success) {
    rec.failure_reason = last.reason;
    return rec;
  }

  if (looks_like_uri(last.image)) {
    rec.success = true;
    rec.image_ref = last.image;
    return rec;
  }
  auto bytes = base64_decode(last.image);
  if (!bytes) {
    rec.failure_reason = "bad image payload";
    return rec;
  }
  const auto relative = std::filesystem::path("images") / (rec.record_id + ".png");
  std::ofstream img(out_dir / relative, std::ios::binary | std::ios::trunc);
  img.write(bytes->data(), static_cast<std::streamsize>(bytes->size()));
  if (!img) {
    rec.failure_reason = "cannot save image";
    return rec;
  }
  rec.success = true;
  rec.image_ref = relative.generic_string();
  return rec;
}

bool parse_bool(std::string_view s, bool& out) {
  if (s == "true") {
    out = true;
    return true;
  }
  if (s == "false") {
    out = false;
    return true;
  }
  return false;
}

}  // namespace

std::string record_id_for(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "r%06zu", index + 1);
  return buf;
}

CampaignManifest run_campaign(const std::vector<PromptCase>& cases, const std::string& endpoint_uri,
                              const CampaignOptions& options, const std::filesystem::path& out_dir) {
  if (options.concurrency == 0) throw Error("concurrency limit must be positive");
  const Endpoint endpoint = parse_endpoint(endpoint_uri);

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "images", ec);
  const auto manifest_path = out_dir / "manifest.jsonl";
  {
    std::ofstream probe(manifest_path, std::ios::binary | std::ios::trunc);
    if (ec || !probe) throw Error("campaign directory is not writable: " + out_dir.string());
  }

  CampaignManifest manifest(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    httplib::Client client(endpoint.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      manifest[i] = run_case(client, endpoint, options, out_dir, cases[i], i);
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::min(options.concurrency, std::max<std::size_t>(1, cases.size()));
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  write_manifest(manifest_path, manifest);
  return manifest;
}

nlohmann::json to_json(const CampaignRecord& r) {
  nlohmann::json outcome;
  if (r.success) {
    outcome = {{"status", "success"}, {"image_ref", r.image_ref}};
  } else {
    outcome = {{"status", "failed"}, {"reason", r.failure_reason}};
  }
  return {{"record_id", r.record_id},
          {"case", to_json(r.prompt)},
          {"request_time", r.request_time},
          {"attempts", r.attempts},
          {"outcome", outcome}};
}

CampaignRecord campaign_record_from_json(const nlohmann::json& j) {
  try {
    CampaignRecord r;
    r.record_id = j.at("record_id").get<std::string>();
    r.prompt = prompt_case_from_json(j.at("case"));
    r.request_time = j.value("request_time", "");
    r.attempts = j.at("attempts").get<int>();
    const auto& outcome = j.at("outcome");
    const auto status = outcome.at("status").get<std::string>();
    if (status == "success") {
      r.success = true;
      r.image_ref = outcome.at("image_ref").get<std::string>();
      if (r.image_ref.empty()) throw Error("record " + r.record_id + ": empty image_ref");
    } else if (status == "failed") {
      r.failure_reason = outcome.value("reason", "");
    } else {
      throw Error("record " + r.record_id + ": unknown outcome status " + status);
    }
    if (r.attempts < 1) throw Error("record " + r.record_id + ": attempts must be at least 1");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed manifest record: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const CampaignManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write manifest: " + path.string());
  for (const auto& r : manifest) out << to_json(r).dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

namespace {

template <typename F>
void for_each_jsonl(const std::filesystem::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": invalid JSON: " + e.what(), line_no);
    }
    f(j);
  }
}

}  // namespace

CampaignManifest read_manifest(const std::filesystem::path& path) {
  CampaignManifest manifest;
  for_each_jsonl(path, [&](const nlohmann::json& j) {
    manifest.push_back(campaign_record_from_json(j));
  });
  return manifest;
}

std::vector<PromptCase> read_cases(const std::filesystem::path& path) {
  std::vector<PromptCase> cases;
  for_each_jsonl(path, [&](const nlohmann::json& j) { cases.push_back(prompt_case_from_json(j)); });
  return cases;
}

void write_cases(const std::filesystem::path& path, const std::vector<PromptCase>& cases) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write cases: " + path.string());
  for (const auto& c : cases) out << to_json(c).dump() << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<Label> parse_labels(std::string_view text) {
  auto records = csv::parse(text);
  if (records.empty()) throw Error("labels file is empty");
  const auto& header = records.front();
  if (header.fields.size() != 3 || trim(header.fields[0]) != "record_id" ||
      trim(header.fields[1]) != "concrete_word_present" || trim(header.fields[2]) != "annotator") {
    throw ParseError("expected header '" + std::string(kLabelsHeader) + "'", header.line);
  }
  std::vector<Label> labels;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.fields.size() != 3) {
      throw ParseError("expected 3 fields, got " + std::to_string(rec.fields.size()), rec.line);
    }
    Label l;
    l.record_id = trim(rec.fields[0]);
    if (l.record_id.empty()) throw ParseError("empty record_id", rec.line);
    if (!parse_bool(trim(rec.fields[1]), l.concrete_word_present)) {
      throw ParseError("concrete_word_present must be true or false, got '" + rec.fields[1] + "'",
                       rec.line);
    }
    l.annotator = trim(rec.fields[2]);
    labels.push_back(std::move(l));
  }
  return labels;
}

std::vector<Label> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open labels: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_labels(buf.str());
}

LabeledCampaign ingest_labels(const CampaignManifest& manifest, const std::vector<Label>& labels) {
  LabeledCampaign out;
  out.records = manifest;
  out.labels.assign(manifest.size(), std::nullopt);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < manifest.size(); ++i) index.emplace(manifest[i].record_id, i);

  for (const auto& l : labels) {
    auto it = index.find(l.record_id);
    if (it == index.end()) throw Error("label references unknown record_id: " + l.record_id);
    const std::size_t i = it->second;
    if (!manifest[i].success) {
      throw Error("label references failed record_id: " + l.record_id);
    }
    if (out.labels[i]) throw Error("record_id labeled more than once: " + l.record_id);
    out.labels[i] = l;
  }
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!out.labels[i]) out.unlabeled.push_back(manifest[i].record_id);
  }
  return out;
}

LabeledCampaign ingest_labels(const CampaignManifest& manifest,
                              const std::filesystem::path& labels_path) {
  return ingest_labels(manifest, read_labels(labels_path));
}

double reference_defense_percent(TemplateId id) {
  switch (id) {
    case TemplateId::attack:
      return 24.46;
    case TemplateId::defense_definition:
      return 34.93;
    case TemplateId::defense_substitution:
      return 48.22;
  }
  return 0.0;
}

RateReport success_rates(const LabeledCampaign& labeled) {
  RateReport report;
  report.n_unlabeled = labeled.unlabeled.size();

  auto finish = [](RateGroup& g) {
    if (g.n_labeled == 0) return;
    g.defense_success_rate =
        static_cast<double>(g.n_concrete_absent) / static_cast<double>(g.n_labeled);
    g.attack_success_rate = 1.0 - g.defense_success_rate;
  };

  report.overall.group = "overall";
  for (auto id : kAllTemplates) {
    RateGroup g;
    g.group = std::string(to_string(id));
    g.reference_percent = reference_defense_percent(id);
    bool present = false;
    for (std::size_t i = 0; i < labeled.records.size(); ++i) {
      if (labeled.records[i].prompt.template_id != id) continue;
      present = true;
      if (!labeled.labels[i]) continue;
      ++g.n_labeled;
      if (!labeled.labels[i]->concrete_word_present) ++g.n_concrete_absent;
    }
    if (!present) continue;
    if (g.n_labeled == 0) {
      report.warnings.push_back("no labeled records for template " + g.group + "; group omitted");
      continue;
    }
    finish(g);
    report.overall.n_labeled += g.n_labeled;
    report.overall.n_concrete_absent += g.n_concrete_absent;
    report.groups.push_back(std::move(g));
  }
  finish(report.overall);
  if (report.overall.n_labeled == 0) report.warnings.push_back("no labeled records");
  return report;
}

namespace {

nlohmann::json group_json(const RateGroup& g) {
  nlohmann::json j = {{"group", g.group},
                      {"n_labeled", g.n_labeled},
                      {"n_concrete_absent", g.n_concrete_absent},
                      {"defense_success_rate", g.defense_success_rate},
                      {"attack_success_rate", g.attack_success_rate}};
  j["reference_percent"] = g.reference_percent ? nlohmann::json(*g.reference_percent) : nullptr;
  return j;
}

RateGroup group_from_json(const nlohmann::json& j) {
  RateGroup g;
  g.group = j.at("group").get<std::string>();
  g.n_labeled = j.at("n_labeled").get<std::size_t>();
  g.n_concrete_absent = j.at("n_concrete_absent").get<std::size_t>();
  g.defense_success_rate = j.at("defense_success_rate").get<double>();
  g.attack_success_rate = j.at("attack_success_rate").get<double>();
  if (j.contains("reference_percent") && !j["reference_percent"].is_null()) {
    g.reference_percent = j["reference_percent"].get<double>();
  }
  return g;
}

}  // namespace

nlohmann::json to_json(const RateReport& report) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups) groups.push_back(group_json(g));
  return {{"schema", "rate_report"},
          {"groups", groups},
          {"overall", group_json(report.overall)},
          {"n_unlabeled", report.n_unlabeled},
          {"warnings", report.warnings}};
}

RateReport rate_report_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema") != "rate_report") throw Error("not a rate report");
    RateReport r;
    for (const auto& g : j.at("groups")) r.groups.push_back(group_from_json(g));
    r.overall = group_from_json(j.at("overall"));
    r.n_unlabeled = j.value("n_unlabeled", std::size_t{0});
    r.warnings = j.value("warnings", std::vector<std::string>{});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed rate report: ") + e.what());
  }
}

}  // namespace negprobe
