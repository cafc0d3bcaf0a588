#include "negprobe/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "negprobe/campaign.hpp"
#include "negprobe/csv.hpp"
#include "negprobe/error.hpp"
#include "negprobe/probe_suite.hpp"

namespace negprobe {
namespace {

using Table = std::vector<std::vector<std::string>>;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string layout(const Table& rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::csv) {
    for (const auto& r : rows) out += csv::join(r) + "\n";
    return out;
  }
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c) line += "  ";
      const auto& cell = rows[i][c];
      // First column left-aligned, numbers right-aligned.
      if (c == 0) {
        line += cell + std::string(width[c] - cell.size(), ' ');
      } else {
        line += std::string(width[c] - cell.size(), ' ') + cell;
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

std::string render_probe(const ProbeReport& r, ReportFormat format) {
  const std::string scale = fixed(r.unit_scale, 0);
  Table t{{"composition", "mean", "std", "n", "mean_x" + scale, "std_x" + scale}};
  for (const auto& row : r.rows) {
    t.push_back({row.label, fixed(row.mean, 6), fixed(row.std, 6), std::to_string(row.n),
                 fixed(row.mean * r.unit_scale, 3), fixed(row.std * r.unit_scale, 3)});
  }
  return layout(t, format);
}

std::string render_histogram(const HistogramReport& r, ReportFormat format) {
  Table t{{"pair_kind", "n", "mean", "median", "min", "max"}};
  for (const auto& c : r.categories) {
    if (c.samples.empty()) {
      t.push_back({std::string(to_string(c.kind)), "0", "-", "-", "-", "-"});
      continue;
    }
    auto stats = summarize(c.samples);
    auto [lo, hi] = std::minmax_element(c.samples.begin(), c.samples.end());
    t.push_back({std::string(to_string(c.kind)), std::to_string(c.samples.size()),
                 fixed(stats.mean, 4), fixed(median(c.samples), 4), fixed(*lo, 4),
                 fixed(*hi, 4)});
  }
  return layout(t, format);
}

std::string render_rates(const RateReport& r, ReportFormat format) {
  Table t{{"template", "n", "defense %", "attack %", "reference %"}};
  auto add = [&](const RateGroup& g) {
    t.push_back({g.group, std::to_string(g.n_labeled), fixed(100.0 * g.defense_success_rate, 2),
                 fixed(100.0 * g.attack_success_rate, 2),
                 g.reference_percent ? fixed(*g.reference_percent, 2) : "-"});
  };
  for (const auto& g : r.groups) add(g);
  add(r.overall);
  std::string out = layout(t, format);
  if (format == ReportFormat::table) {
    if (r.n_unlabeled) out += "unlabeled records excluded: " + std::to_string(r.n_unlabeled) + "\n";
    for (const auto& w : r.warnings) out += "warning: " + w + "\n";
  }
  return out;
}

}  // namespace

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "table") return ReportFormat::table;
  if (name == "csv") return ReportFormat::csv;
  throw Error("unknown report format: " + std::string(name));
}

std::string render_report(const nlohmann::json& report, ReportFormat format) {
  if (!report.is_object() || !report.contains("schema") || !report["schema"].is_string()) {
    throw Error("unrecognized report");
  }
  const auto schema = report["schema"].get<std::string>();
  if (schema == "probe_report") return render_probe(probe_report_from_json(report), format);
  if (schema == "histogram_report") {
    return render_histogram(histogram_report_from_json(report), format);
  }
  if (schema == "rate_report") return render_rates(rate_report_from_json(report), format);
  throw Error("unrecognized report");
}

std::string render_report(const std::filesystem::path& report_path, ReportFormat format) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw Error("cannot open report: " + report_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception&) {
    throw Error("unrecognized report");
  }
  return render_report(j, format);
}

}  // namespace negprobe
