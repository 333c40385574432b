#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "mtbias/text.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = MTBIAS_TEST_DATA;

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI with stdout captured; stderr goes to `err` when given.
Run cli(const std::string& args, const fs::path& err = {}) {
  std::string cmd = std::string(MTBIAS_CLI) + " " + args;
  if (!err.empty()) cmd += " 2>" + err.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mtbias_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  static std::string data(const std::string& name) { return (kData / name).string(); }

  // translate -> match -> evaluate with a mock rule; returns evaluate's stdout.
  std::string mock_pipeline(const std::string& rule, const std::string& tag) {
    EXPECT_EQ(cli("translate --corpus " + data("fixture_corpus.tsv") + " --backend mock:" + rule +
                  " --lexicon " + data("lexicon_es.tsv") + " --out " + p(tag + ".tsv"))
                  .status,
              0);
    EXPECT_EQ(cli("match --corpus " + data("fixture_corpus.tsv") + " --translations " +
                  p(tag + ".tsv") + " --lexicon " + data("lexicon_es.tsv") + " --out " +
                  p(tag + ".matches.jsonl"))
                  .status,
              0);
    const auto r = cli("evaluate --corpus " + data("fixture_corpus.tsv") + " --matches " +
                       p(tag + ".matches.jsonl") + " --out " + p(tag + ".records.jsonl"));
    EXPECT_EQ(r.status, 0);
    return r.out;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, EvaluateStereotypeFollower) {
  EXPECT_EQ(mock_pipeline("stereotype-follower", "stereo"), "Acc ΔG ΔS\n50.0 0.0 100.0\n");
}

TEST_F(Cli, EvaluatePronounFollower) {
  EXPECT_EQ(mock_pipeline("pronoun-follower", "pron"), "Acc ΔG ΔS\n100.0 0.0 0.0\n");
}

TEST_F(Cli, CompareStrictDominance) {
  mock_pipeline("stereotype-follower", "stereo");
  mock_pipeline("pronoun-follower", "pron");
  const auto r = cli("compare --a " + p("pron.records.jsonl") + " --b " + p("stereo.records.jsonl"));
  ASSERT_EQ(r.status, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out).at("p_value"), 0.0);
  const auto back = cli("compare --a " + p("stereo.records.jsonl") + " --b " + p("pron.records.jsonl"));
  EXPECT_EQ(nlohmann::json::parse(back.out).at("p_value"), 1.0);
}

TEST_F(Cli, BuildPromptsGolden) {
  const auto r = cli("build-prompts --exemplars " + data("golden_exemplars.json") + " --human " +
                     data("human_es.tsv") + " --corpus " + data("fixture_corpus.tsv") + " --out " +
                     p("prompts.jsonl") + " --prefix-out " + p("prefix.txt"));
  ASSERT_EQ(r.status, 0);
  const auto golden = mtbias::read_file(kData / "golden_prefix_nt_female.txt");
  EXPECT_EQ(mtbias::read_file(p("prefix.txt")), golden);
  const auto lines = mtbias::split_lines(mtbias::read_file(p("prompts.jsonl")));
  ASSERT_EQ(lines.size(), 64u);
  const auto second = nlohmann::json::parse(lines[1]);
  EXPECT_EQ(second.at("instance_id"), "line:2");
  EXPECT_EQ(second.at("prompt"), golden + mtbias::read_file(kData / "golden_query_line2.txt"));
}

TEST_F(Cli, ReferenceAttributionThroughReport) {
  mock_pipeline("pronoun-follower", "pron");
  ASSERT_EQ(cli("attribute --corpus " + data("fixture_corpus.tsv") + " --translations " +
                p("pron.tsv") + " --reference-seed 7 --out " + p("attr.jsonl"))
                .status,
            0);
  ASSERT_EQ(cli("evaluate --corpus " + data("fixture_corpus.tsv") + " --matches " +
                p("pron.matches.jsonl") + " --attributions " + p("attr.jsonl") + " --out " +
                p("records.jsonl"))
                .status,
            0);
  for (const auto& line : mtbias::split_lines(mtbias::read_file(p("records.jsonl")))) {
    EXPECT_TRUE(nlohmann::json::parse(line).contains("triple")) << line;
  }
  const auto sel = cli("select-exemplars --records " + p("records.jsonl") + " --corpus " +
                       data("fixture_corpus.tsv") + " --out " + p("ex.json"));
  ASSERT_EQ(sel.status, 0);
  EXPECT_EQ(nlohmann::json::parse(mtbias::read_file(p("ex.json"))).at("exemplars").size(), 4u);
  const auto rep = cli("report --records " + p("records.jsonl") + " --out-dir " + p("report") +
                       " --corpus " + data("fixture_corpus.tsv") + " --lexicon " +
                       data("lexicon_es.tsv") + " --format table");
  ASSERT_EQ(rep.status, 0);
  const auto table = mtbias::read_file(p("report/report.txt"));
  EXPECT_EQ(table.rfind("# manifest ", 0), 0u);
  EXPECT_NE(table.find("100.0 0.0 0.0\n"), std::string::npos);
}

TEST_F(Cli, MissingInputNamesProducer) {
  const auto r = cli("evaluate --corpus " + data("fixture_corpus.tsv") + " --matches " +
                         p("nope.jsonl") + " --out " + p("records.jsonl"),
                     p("err.txt"));
  EXPECT_EQ(r.status, 1);
  const auto err = nlohmann::json::parse(mtbias::read_file(p("err.txt")));
  EXPECT_EQ(err.at("error").at("kind"), "missing-input");
  EXPECT_NE(err.at("error").at("message").get<std::string>().find("mtbias match"),
            std::string::npos);
}

TEST_F(Cli, ParseErrorReportsKind) {
  mtbias::write_file(p("bad.tsv"), "male\tx\tThe pilot said he left.\tpilot\tpro\n");
  const auto r = cli("translate --corpus " + p("bad.tsv") + " --backend offline --offline " +
                         p("bad.tsv") + " --out " + p("t.tsv"),
                     p("err.txt"));
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(nlohmann::json::parse(mtbias::read_file(p("err.txt"))).at("error").at("kind"),
            "parse-error");
}
