#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "negprobe/cli.hpp"
#include "negprobe/mock_endpoint.hpp"
#include "support/process.hpp"
#include "support/temp_dir.hpp"
#include "support/tiny_fixture.hpp"

namespace negprobe {
namespace {

using testing::source_path;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    weights_ = testing::write_tiny_fixture(dir_ / "tiny.bin").string();
    vocab_ = testing::write_tiny_vocab(dir_ / "tiny_vocab.txt").string();
    testing::write_file(dir_ / "tiny.csv",
                        "id,w_abs,w_abs_def,w_con,w_syn,w_hyp\n"
                        "r1,ab,Some thing.,ba,aab,b\n"
                        "r2,aab,Other thing.,x,ab,\n"
                        "r3,c,Third.,bab,,a\n");
    dataset_ = (dir_ / "tiny.csv").string();
  }
  testing::TempDir dir_;
  std::string weights_, vocab_, dataset_;
};

TEST_F(Cli, UsageErrors) {
  auto r = run({"--no-such-flag"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"forge"}).code, 2);
  EXPECT_EQ(run({"forge", "attack"}).code, 2);
  EXPECT_EQ(run({"render", "--report", "x", "--format", "xml"}).code, 2);
}

TEST_F(Cli, EveryCommandHasHelp) {
  const std::vector<std::vector<std::string>> cmds = {
      {},
      {"tokenize"},
      {"encode"},
      {"probe"},
      {"probe", "linearity"},
      {"probe", "negation"},
      {"probe", "export"},
      {"forge"},
      {"forge", "attack"},
      {"forge", "defend-def"},
      {"forge", "defend-sub"},
      {"dataset"},
      {"dataset", "validate"},
      {"campaign"},
      {"campaign", "run"},
      {"campaign", "report"},
      {"render"}};
  for (auto c : cmds) {
    std::string name;
    for (const auto& s : c) name += s + " ";
    c.push_back("--help");
    auto r = run(c);
    EXPECT_EQ(r.code, 0) << name << r.err;
    EXPECT_NE(r.out.find("Usage: negprobe " + name), std::string::npos) << r.out;
  }
}

TEST_F(Cli, Tokenize) {
  auto r = run({"tokenize", "--text", "Despair not cat"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("49406 28097 783 2368 49407", 0), 0u);
  EXPECT_NE(r.out.find("eot_index 4"), std::string::npos);
}

TEST_F(Cli, ProbeLinearityWritesThreeRows) {
  auto out = (dir_ / "r.json").string();
  auto r = run({"probe", "linearity", "--weights", weights_, "--vocab", vocab_, "--dataset",
                dataset_, "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(testing::read_file(out));
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["label"], "sub");
  EXPECT_EQ(j["rows"][2]["label"], "add_not");
  EXPECT_TRUE(std::filesystem::exists(dir_ / "r.csv"));
  EXPECT_NE(r.out.find("add_not"), std::string::npos);

  // Identical argv and inputs give byte-identical files.
  auto first = testing::read_file(out);
  ASSERT_EQ(run({"probe", "linearity", "--weights", weights_, "--vocab", vocab_, "--dataset",
                 dataset_, "--out", out, "--threads", "3"})
                .code,
            0);
  EXPECT_EQ(testing::read_file(out), first);

  auto rendered = run({"render", "--report", out, "--format", "csv"});
  EXPECT_EQ(rendered.code, 0);
  EXPECT_EQ(rendered.out.rfind("composition,mean,std,n", 0), 0u);
}

TEST_F(Cli, ProbeNegationAndExport) {
  auto out = (dir_ / "h.json").string();
  auto r = run({"probe", "negation", "--weights", weights_, "--vocab", vocab_, "--dataset",
                dataset_, "--out", out, "--bin-width", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(testing::read_file(out));
  EXPECT_EQ(j["schema"], "histogram_report");
  EXPECT_DOUBLE_EQ(j["bin_width"].get<double>(), 0.1);

  testing::write_file(dir_ / "s.txt", "ab\n\nab not ba\n");
  auto e = run({"probe", "export", "--weights", weights_, "--vocab", vocab_, "--sentences",
                (dir_ / "s.txt").string(), "--out", (dir_ / "e.csv").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("wrote 2 rows"), std::string::npos);
  EXPECT_EQ(run({"probe", "export", "--weights", weights_, "--vocab", vocab_, "--out",
                 (dir_ / "e.csv").string()})
                .code,
            2);
}

TEST_F(Cli, OperationalFailures) {
  auto r = run({"probe", "linearity", "--weights", (dir_ / "missing.bin").string(), "--vocab",
                vocab_, "--dataset", dataset_, "--out", (dir_ / "r.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  // The tiny model cannot embed ids from the full vocabulary.
  r = run({"encode", "--weights", weights_, "--text", "cat"});
  EXPECT_EQ(r.code, 1);
  testing::write_file(dir_ / "bad.json", "garbage");
  r = run({"render", "--report", (dir_ / "bad.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unrecognized report"), std::string::npos);
}

TEST_F(Cli, DatasetValidate) {
  EXPECT_EQ(run({"dataset", "validate", "--path", source_path("data/attack_triples.csv").string()}).code, 0);
  testing::write_file(dir_ / "bad.csv",
                      "id,w_abs,w_abs_def,w_con\nr1,cat,d,cat\nr2,joy,d,dog\n");
  auto r = run({"dataset", "validate", "--path", (dir_ / "bad.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("abstract equals concrete"), std::string::npos);
  EXPECT_NE(r.out.find("r1"), std::string::npos);
}

TEST_F(Cli, ForgeAndSeedOverride) {
  const auto t3 = source_path("data/attack_triples.csv").string();
  auto a = (dir_ / "a.jsonl").string();
  ASSERT_EQ(run({"forge", "attack", "--dataset", t3, "--out", a}).code, 0);
  auto lines = testing::read_file(a);
  EXPECT_NE(lines.find("\"rendered\":\"draw despair without cat\""), std::string::npos);

  auto d = (dir_ / "d.jsonl").string();
  ASSERT_EQ(run({"forge", "defend-def", "--dataset", t3, "--out", d}).code, 0);
  EXPECT_NE(testing::read_file(d).find(
                "draw loneliness, which is sadness because one has no friends or company, without turtle"),
            std::string::npos);
  ASSERT_EQ(run({"forge", "defend-def", "--dataset", t3, "--out", d, "--raw"}).code, 0);
  EXPECT_NE(testing::read_file(d).find("which is The complete loss"), std::string::npos);

  auto s1 = (dir_ / "s1.jsonl").string(), s2 = (dir_ / "s2.jsonl").string();
  ASSERT_EQ(run({"forge", "defend-sub", "--dataset", t3, "--out", s1, "--seed", "5"}).code, 0);
  ::setenv("NEGPROBE_SEED", "5", 1);
  ASSERT_EQ(run({"forge", "defend-sub", "--dataset", t3, "--out", s2, "--seed", "999"}).code, 0);
  ::setenv("NEGPROBE_SEED", "x5", 1);
  EXPECT_EQ(run({"forge", "defend-sub", "--dataset", t3, "--out", s2}).code, 2);
  ::unsetenv("NEGPROBE_SEED");
  EXPECT_EQ(testing::read_file(s1), testing::read_file(s2));

  ASSERT_EQ(run({"forge", "defend-sub", "--dataset", t3, "--out", s1, "--include", "dog"}).code, 0);
  EXPECT_NE(testing::read_file(s1).find("draw thrill, include dog, instead of bear"),
            std::string::npos);
}

TEST_F(Cli, CampaignRunAndReport) {
  MockEndpoint mock;
  mock.start();
  const auto t3 = source_path("data/attack_triples.csv").string();
  auto cases = (dir_ / "cases.jsonl").string();
  ASSERT_EQ(run({"forge", "attack", "--dataset", t3, "--out", cases}).code, 0);
  auto r = run({"campaign", "run", "--cases", cases, "--endpoint", mock.url(), "--concurrency",
                "2", "--out", (dir_ / "camp").string(), "--backoff-ms", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("succeeded 5"), std::string::npos);
  auto rates = (dir_ / "rates.json").string();
  r = run({"campaign", "report", "--manifest", (dir_ / "camp" / "manifest.jsonl").string(),
           "--labels", source_path("data/attack_labels.csv").string(), "--out", rates});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("24.46"), std::string::npos);
  auto j = nlohmann::json::parse(testing::read_file(rates));
  EXPECT_EQ(j["schema"], "rate_report");
  EXPECT_DOUBLE_EQ(j["groups"][0]["defense_success_rate"].get<double>(), 0.4);

  testing::write_file(dir_ / "zzz.csv", "record_id,concrete_word_present,annotator\nzzz,true,a\n");
  r = run({"campaign", "report", "--manifest", (dir_ / "camp" / "manifest.jsonl").string(),
           "--labels", (dir_ / "zzz.csv").string(), "--out", rates});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("zzz"), std::string::npos);
}

TEST_F(Cli, BinaryExitCodes) {
  const std::string exe = NEGPROBE_CLI_PATH;
  EXPECT_EQ(testing::run_process(exe, {"--help"}, dir_ / "o", dir_ / "e"), 0);
  EXPECT_EQ(testing::run_process(exe, {"--bogus"}, dir_ / "o", dir_ / "e"), 2);
  EXPECT_NE(testing::read_file(dir_ / "e").find("Usage"), std::string::npos);
  EXPECT_EQ(testing::run_process(exe, {"render", "--report", "/nonexistent"}, dir_ / "o", dir_ / "e"),
            1);
  EXPECT_EQ(testing::run_process(NEGPROBE_MOCK_PATH, {"--help"}, dir_ / "o", dir_ / "e"), 0);
}

}  // namespace
}  // namespace negprobe
