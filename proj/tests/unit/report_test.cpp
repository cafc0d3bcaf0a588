#include <gtest/gtest.h>

#include "negprobe/campaign.hpp"
#include "negprobe/error.hpp"
#include "negprobe/probe_suite.hpp"
#include "negprobe/report.hpp"
#include "support/temp_dir.hpp"

namespace negprobe {
namespace {

RateReport sample_rates() {
  RateReport r;
  r.groups.push_back({"attack", 8, 2, 0.25, 0.75, 24.46});
  r.overall = {"overall", 8, 2, 0.25, 0.75, std::nullopt};
  return r;
}

TEST(Report, RateTable) {
  auto text = render_report(to_json(sample_rates()), ReportFormat::table);
  auto header = text.substr(0, text.find('\n'));
  for (const char* col : {"template", "n", "defense %", "attack %", "reference %"}) {
    EXPECT_NE(header.find(col), std::string::npos) << col;
  }
  EXPECT_NE(text.find("24.46"), std::string::npos);
  EXPECT_NE(text.find("25.00"), std::string::npos);
  EXPECT_NE(text.find("overall"), std::string::npos);
}

TEST(Report, RateCsv) {
  EXPECT_EQ(render_report(to_json(sample_rates()), ReportFormat::csv),
            "template,n,defense %,attack %,reference %\n"
            "attack,8,25.00,75.00,24.46\n"
            "overall,8,25.00,75.00,-\n");
}

TEST(Report, ProbeTable) {
  ProbeReport p;
  for (const char* l : {"sub", "add", "add_not"}) p.rows.push_back({l, 0.5, 0.1, 2, {0.4, 0.6}, {"a", "b"}});
  auto csv = render_report(to_json(p), ReportFormat::csv);
  EXPECT_EQ(csv,
            "composition,mean,std,n,mean_x1000,std_x1000\n"
            "sub,0.500000,0.100000,2,500.000,100.000\n"
            "add,0.500000,0.100000,2,500.000,100.000\n"
            "add_not,0.500000,0.100000,2,500.000,100.000\n");
}

TEST(Report, Unrecognized) {
  testing::TempDir dir;
  testing::write_file(dir / "bad.json", "{not json");
  try {
    render_report(dir / "bad.json", ReportFormat::table);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "unrecognized report");
  }
  EXPECT_THROW(render_report(nlohmann::json{{"schema", "other"}}, ReportFormat::table), Error);
  EXPECT_THROW(report_format_from_string("xml"), Error);
}

}  // namespace
}  // namespace negprobe
