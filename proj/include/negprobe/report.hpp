#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace negprobe {

enum class ReportFormat { table, csv };

ReportFormat report_format_from_string(std::string_view name);

// Renders a probe, histogram or rate report. Throws Error("unrecognized
// report") for anything else. Output is a pure function of the JSON.
std::string render_report(const nlohmann::json& report, ReportFormat format);
std::string render_report(const std::filesystem::path& report_path, ReportFormat format);

}  // namespace negprobe
