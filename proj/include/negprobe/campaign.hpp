#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "negprobe/prompt_forge.hpp"

namespace negprobe {

struct CampaignOptions {
  std::size_t concurrency = 4;
  std::chrono::milliseconds timeout{120'000};
  int max_attempts = 3;
  // Wait before retry k (1-based) is initial_backoff * 2^(k-1): 1s, 2s, 4s, ...
  std::chrono::milliseconds initial_backoff{1'000};
};

struct CampaignRecord {
  std::string record_id;
  PromptCase prompt;
  std::string request_time;  // UTC ISO-8601 of the first attempt
  int attempts = 0;
  bool success = false;
  std::string image_ref;       // uri, or path relative to the campaign directory
  std::string failure_reason;  // "connect", "timeout", "http 404", ...
};

using CampaignManifest = std::vector<CampaignRecord>;

// Stable id for the record at zero-based input position `index`.
std::string record_id_for(std::size_t index);

// POSTs {"prompt": rendered} for every case with at most `concurrency`
// requests in flight. Status 429/5xx and transport errors are retried up to
// max_attempts; other statuses fail at once. Manifest order equals input
// order. Writes out_dir/manifest.jsonl; base64 image payloads are saved under
// out_dir/images/. Throws Error only when out_dir is not writable.
CampaignManifest run_campaign(const std::vector<PromptCase>& cases, const std::string& endpoint,
                              const CampaignOptions& options, const std::filesystem::path& out_dir);

nlohmann::json to_json(const CampaignRecord& record);
CampaignRecord campaign_record_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const CampaignManifest& manifest);
CampaignManifest read_manifest(const std::filesystem::path& path);
std::vector<PromptCase> read_cases(const std::filesystem::path& jsonl_path);
void write_cases(const std::filesystem::path& jsonl_path, const std::vector<PromptCase>& cases);

struct Label {
  std::string record_id;
  bool concrete_word_present = false;
  std::string annotator;
};

inline constexpr std::string_view kLabelsHeader = "record_id,concrete_word_present,annotator";

std::vector<Label> parse_labels(std::string_view csv_text);
std::vector<Label> read_labels(const std::filesystem::path& path);

struct LabeledCampaign {
  CampaignManifest records;
  std::vector<std::optional<Label>> labels;  // parallel to records
  std::vector<std::string> unlabeled;        // record ids without a label
};

// Throws Error naming the id for labels that reference unknown or failed
// records, and for a record labeled twice.
LabeledCampaign ingest_labels(const CampaignManifest& manifest, const std::vector<Label>& labels);
LabeledCampaign ingest_labels(const CampaignManifest& manifest,
                              const std::filesystem::path& labels_path);

struct RateGroup {
  std::string group;  // template id, or "overall"
  std::size_t n_labeled = 0;
  std::size_t n_concrete_absent = 0;
  double defense_success_rate = 0.0;
  double attack_success_rate = 0.0;
  std::optional<double> reference_percent;  // published defense success rate
};

struct RateReport {
  std::vector<RateGroup> groups;
  RateGroup overall;
  std::size_t n_unlabeled = 0;
  std::vector<std::string> warnings;
};

// Published defense success rates (%) for each template.
double reference_defense_percent(TemplateId id);

// Groups with no labeled record are omitted with a warning.
RateReport success_rates(const LabeledCampaign& labeled);

nlohmann::json to_json(const RateReport& report);
RateReport rate_report_from_json(const nlohmann::json& j);

}  // namespace negprobe
