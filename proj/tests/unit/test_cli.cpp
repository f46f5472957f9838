#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "logcurves/synth.hpp"

namespace fs = std::filesystem;
namespace cli = logcurves::cli;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("logcurves-cli-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream out(path("cycles.log"), std::ios::binary);
    logcurves::synth::write_log(out, logcurves::synth::failure_recovery_log({}));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  nlohmann::json doc(const std::string& name) const { return nlohmann::json::parse(slurp(path(name))); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, AnalyzeWritesDocumentAndSummary) {
  const auto r = run({"analyze", path("cycles.log"), "-o", path("c.json")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto d = doc("c.json");
  EXPECT_GE(d["checkpoints"].size(), 12u);
  EXPECT_EQ(d["embeddings"].size(), 3u);
  EXPECT_EQ(d["meta"]["config"]["target-points"], "60");
  EXPECT_NE(r.out.find("2000 records"), std::string::npos);
  EXPECT_NE(r.out.find("time (s): ingest"), std::string::npos);
}

TEST_F(CliTest, AnalyzeSvgAndDumps) {
  const auto r = run({"analyze", path("cycles.log"), "-o", path("c.json"), "--format", "svg", "--alpha", "0,0.5",
                      "--dump-templates", path("t.tsv"), "--dump-matrix", path("m.csv"), "-q"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(fs::exists(path("c.json")));
  EXPECT_TRUE(fs::exists(path("c-alpha0.svg")));
  EXPECT_TRUE(fs::exists(path("c-alpha0.5.svg")));
  EXPECT_NE(slurp(path("t.tsv")).find("\t"), std::string::npos);
  EXPECT_FALSE(slurp(path("m.csv")).empty());
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"analyze", path("missing.log")}).code, cli::kExitConfig);
  std::ofstream(path("empty.log")).close();
  EXPECT_EQ(run({"analyze", path("empty.log"), "-o", path("e.json")}).code, cli::kExitEmptyInput);
  EXPECT_EQ(run({"analyze", path("cycles.log"), "--target-points", "0"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"analyze", path("cycles.log"), "--string-metric", "cosine"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"analyze", path("cycles.log"), "--severity-keyword", "PANIC"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"analyze", path("cycles.log"), "--mask-rule", "([a-"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"bogus"}).code, cli::kExitConfig);
  EXPECT_EQ(run({}).code, cli::kExitConfig);
  std::ofstream(path("bad.json")) << "{\"version\": 2}";
  EXPECT_EQ(run({"render", path("bad.json")}).code, cli::kExitConfig);
}

TEST_F(CliTest, TargetPointsOne) {
  const auto r = run({"analyze", path("cycles.log"), "-o", path("one.json"), "--target-points", "1", "--k-gaps", "0",
                      "--severity-threshold", "1e9"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(doc("one.json")["checkpoints"].size(), 1u);
}

TEST_F(CliTest, ConfigFileBelowFlags) {
  std::ofstream(path("run.cfg")) << "# defaults for this run\ntarget-points=1\nk-gaps=0\nseverity-threshold=1e9\n";
  ASSERT_EQ(run({"analyze", path("cycles.log"), "--config", path("run.cfg"), "-o", path("a.json")}).code, 0);
  EXPECT_EQ(doc("a.json")["checkpoints"].size(), 1u);
  EXPECT_EQ(doc("a.json")["meta"]["config"]["k-gaps"], "0");

  ASSERT_EQ(run({"analyze", path("cycles.log"), "--config", path("run.cfg"), "--target-points", "3", "-o",
                 path("b.json")})
                .code,
            0);
  EXPECT_EQ(doc("b.json")["meta"]["config"]["target-points"], "3");
  EXPECT_GT(doc("b.json")["checkpoints"].size(), 1u);

  std::ofstream(path("bad.cfg")) << "no-such-key=1\n";
  EXPECT_EQ(run({"analyze", path("cycles.log"), "--config", path("bad.cfg")}).code, cli::kExitConfig);
  EXPECT_EQ(run({"analyze", path("cycles.log"), "--config", path("missing.cfg")}).code, cli::kExitConfig);
}

TEST_F(CliTest, HelpListsEveryKey) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  for (const char* key : {"base-year", "timestamp-format", "severity-keyword", "target-points", "k-gaps",
                          "window-length", "window-decay", "severity-threshold", "tree-depth", "similarity-threshold",
                          "max-children", "max-template-len", "mask-rule", "w-ins", "w-del", "w-sub", "string-metric",
                          "qgram", "threads", "alpha", "max-iter", "tol", "seed", "endpoint", "model", "token-env",
                          "timeout", "max-retries", "backoff", "offline"}) {
    EXPECT_NE(r.out.find(std::string("  ") + key + " "), std::string::npos) << key;
  }
  const auto sub = run({"analyze", "--help"});
  EXPECT_EQ(sub.code, cli::kExitOk);
  EXPECT_NE(sub.out.find("--similarity-threshold"), std::string::npos);
}

TEST_F(CliTest, OverlayOfSameFileCoincides) {
  const auto r = run({"overlay", "a=" + path("cycles.log"), "b=" + path("cycles.log"), "-o", path("ov.json"), "-q"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto d = doc("ov.json");
  ASSERT_EQ(d["series"].size(), 2u);
  EXPECT_EQ(d["series"][0]["label"], "a");
  const std::size_t n = d["checkpoints"].size() / 2;
  for (const auto& e : d["embeddings"]) {
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = e["points"][i][0].get<double>() - e["points"][i + n][0].get<double>();
      const double dy = e["points"][i][1].get<double>() - e["points"][i + n][1].get<double>();
      EXPECT_LT(std::hypot(dx, dy), 1e-6);
    }
  }
  EXPECT_EQ(run({"overlay", path("cycles.log")}).code, cli::kExitConfig);
}

TEST_F(CliTest, RenderAndEnrichPrompt) {
  ASSERT_EQ(run({"analyze", path("cycles.log"), "-o", path("c.json"), "-q"}).code, 0);
  ASSERT_EQ(run({"render", path("c.json"), "--alpha", "0.25", "--no-labels", "-o", path("r.svg"), "-q"}).code, 0);
  const auto svg = slurp(path("r.svg"));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(svg.find("<text"), std::string::npos);
  EXPECT_EQ(run({"render", path("c.json"), "--alpha", "0.7"}).code, cli::kExitConfig);

  const auto p = run({"enrich", path("c.json"), "--checkpoint", "2", "--compare", "0,1", "--print-prompt"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.out.find("--- system"), std::string::npos);
  EXPECT_EQ(run({"enrich", path("c.json"), "--checkpoint", "2", "--offline"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"enrich", path("c.json"), "--checkpoint", "9999", "--print-prompt"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"enrich", path("c.json"), "--compare", "1"}).code, cli::kExitConfig);
}

TEST_F(CliTest, EnrichUnreachableProvider) {
  ASSERT_EQ(run({"analyze", path("cycles.log"), "-o", path("c.json"), "-q"}).code, 0);
  const auto before = slurp(path("c.json"));
  const auto r = run({"enrich", path("c.json"), "--checkpoint", "1", "--endpoint", "http://127.0.0.1:1/v1/chat",
                      "--max-retries", "0", "--timeout", "2"});
  EXPECT_EQ(r.code, cli::kExitProvider);
  EXPECT_EQ(slurp(path("c.json")), before);
}

TEST_F(CliTest, BenchWritesCsv) {
  {
    std::ofstream out(path("t.log"), std::ios::binary);
    logcurves::synth::write_log(out, logcurves::synth::throughput_log({3000, 20, 80, 1}));
  }
  const auto r = run({"bench", path("t.log"), "--sizes", "1000,2000", "--repeats", "2", "--csv", path("b.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(slurp(path("b.csv")));
  std::vector<std::string> rows;
  for (std::string line; std::getline(csv, line);) rows.push_back(line);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].rfind("size,repeats,ingest_s", 0), 0u);
  EXPECT_EQ(rows[1].rfind("1000,2,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("2000,2,", 0), 0u);
  EXPECT_EQ(run({"bench", path("t.log"), "--sizes", "5000"}).code, cli::kExitConfig);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  ASSERT_EQ(run({"generate", "bursts", "-o", path("a.log"), "--seed", "4", "-q"}).code, 0);
  ASSERT_EQ(run({"generate", "bursts", "-o", path("b.log"), "--seed", "4", "-q"}).code, 0);
  EXPECT_EQ(slurp(path("a.log")), slurp(path("b.log")));
  ASSERT_EQ(run({"generate", "overlay", "-o", path("o.log"), "-q"}).code, 0);
  EXPECT_TRUE(fs::exists(path("o-0.log")));
  EXPECT_TRUE(fs::exists(path("o-2.log")));
}

#ifdef LOGCURVES_CLI_PATH
TEST_F(CliTest, BinaryRunsAreByteIdentical) {
  for (const char* name : {"x.json", "y.json"}) {
    const std::string cmd = std::string("\"") + LOGCURVES_CLI_PATH + "\" analyze \"" + path("cycles.log") +
                            "\" -q -o \"" + path(name) + "\"";
    ASSERT_EQ(std::system(cmd.c_str()), 0) << cmd;
  }
  EXPECT_EQ(slurp(path("x.json")), slurp(path("y.json")));
}
#endif
