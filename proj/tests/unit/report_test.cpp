#include <gtest/gtest.h>

#include <filesystem>

#include "mtbias/report.hpp"

using namespace mtbias;

namespace {

ReportBundle sample_bundle() {
  ReportBundle b;
  b.manifest.corpus_digest = sha256_hex("corpus");
  b.manifest.lexicon_digest = sha256_hex("lexicon");
  b.manifest.backend = "mock:stereotype-follower";
  b.manifest.decoding = {{"strategy", "beam"}, {"num_beams", 4}, {"max_tokens", 256}};
  b.manifest.template_id = "T1";
  b.manifest.nt_policy = "NT-Female";
  b.manifest.seeds = {{"selection", 20230601}, {"bootstrap", 7}};

  BiasReport r;
  r.accuracy = 0.651;
  r.delta_g = 0.072;
  r.delta_s = 0.351;
  CellStats c;
  c.stereotype = Stereotype::Anti;
  c.gold_gender = Gender::Female;
  c.count = 3;
  c.matched = 2;
  c.accuracy = 1.0 / 3.0;
  c.mean_ctrl = 0.1 + 1e-17;
  c.mean_prof = 0.163;
  c.mean_pron = 0.1740000000000001;
  r.cells = {c};
  r.per_profession.delta_g = {{"appraiser", 0.41}, {"baker", -1.0 / 7.0}};
  r.per_profession.omitted = {"pilot"};
  b.bias = r;
  b.relative_diff = {{"a_pron", -14.23}};
  GntReport g;
  g.total = 3;
  for (std::size_t k = 0; k < 4; ++k) g.buckets[k].bucket = kGntBuckets[k];
  g.buckets[1].count = 1;
  g.buckets[1].share = 1.0 / 3.0;
  g.buckets[1].median_pron = 0.0892;
  g.buckets[3].count = 2;
  g.buckets[3].share = 2.0 / 3.0;
  b.gnt = g;
  return b;
}

}  // namespace

TEST(FormatFixed, HalfAwayFromZero) {
  EXPECT_EQ(format_fixed(65.1, 1), "65.1");
  EXPECT_EQ(format_fixed(0.0725 * 100, 1), "7.3");
  EXPECT_EQ(format_fixed(-0.25, 1), "-0.3");
  EXPECT_EQ(format_fixed(-0.01, 1), "0.0");
  EXPECT_EQ(format_fixed(1.0 / 3.0, 4), "0.3333");
}

TEST(Render, BiasRow) {
  BiasReport r;
  r.accuracy = 0.651;
  r.delta_g = 0.072;
  r.delta_s = 0.351;
  EXPECT_EQ(bias_row(r), "65.1 7.2 35.1");
  EXPECT_EQ(render_bias_table(r), "Acc ΔG ΔS\n65.1 7.2 35.1\n");
  r.delta_s.reset();
  EXPECT_EQ(bias_row(r), "65.1 7.2 -");
}

TEST(Render, EmptyProfessionTableIsHeaderOnly) {
  EXPECT_EQ(render_profession_table({}), "Profession ΔG\n");
}

TEST(Render, StructuredRoundTripIsLossless) {
  const auto b = sample_bundle();
  const auto text = render_structured(b);
  const auto back = parse_structured(text);
  EXPECT_EQ(render_structured(back), text);
  EXPECT_EQ(back.bias->accuracy, 0.651);
  EXPECT_EQ(back.bias->cells[0].mean_pron, 0.1740000000000001);
  EXPECT_EQ(back.bias->cells[0].accuracy, 1.0 / 3.0);
  EXPECT_EQ(back.bias->per_profession.delta_g.at("baker"), -1.0 / 7.0);
  EXPECT_EQ(back.gnt->buckets[3].share, 2.0 / 3.0);
  EXPECT_EQ(back.manifest.digest(), b.manifest.digest());
  EXPECT_EQ(nlohmann::json::parse(text).at("manifest_digest"), b.manifest.digest());
}

TEST(Render, Deterministic) {
  const auto b = sample_bundle();
  EXPECT_EQ(render_table(b), render_table(sample_bundle()));
  EXPECT_EQ(render_csv(b), render_csv(sample_bundle()));
  EXPECT_EQ(render_structured(b), render_structured(sample_bundle()));
}

TEST(Render, TableAndCsvCarryManifest) {
  const auto b = sample_bundle();
  const auto digest = b.manifest.digest();
  const auto table = render_table(b);
  EXPECT_EQ(table.rfind("# manifest " + digest + "\n", 0), 0u);
  EXPECT_NE(table.find("65.1 7.2 35.1\n"), std::string::npos);
  EXPECT_NE(table.find("Anti-F 3 2 33.3 0.100 0.163 0.174\n"), std::string::npos);
  EXPECT_NE(table.find("Male 33.3 0.0892\n"), std::string::npos);
  for (const auto& [name, body] : render_csv(b)) {
    const auto lines = split_lines(body);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      EXPECT_EQ(lines[i].substr(lines[i].size() - digest.size()), digest) << name;
    }
  }
  EXPECT_EQ(split_lines(render_csv(b).at("bias"))[1],
            "0.651,0.072,0.351," + digest);
}

TEST(Render, ManifestDigestTracksFields) {
  auto b = sample_bundle();
  const auto before = b.manifest.digest();
  b.manifest.seeds["bootstrap"] = 8;
  EXPECT_NE(b.manifest.digest(), before);
}

TEST(Render, WritesFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "mtbias_report_test";
  std::filesystem::remove_all(dir);
  const auto b = sample_bundle();
  EXPECT_EQ(render(b, ReportFormat::Delimited, dir).size(), 4u);
  const auto json = render(b, ReportFormat::Structured, dir);
  EXPECT_EQ(read_file(json[0]), render_structured(b));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(render(b, ReportFormat::Table, "/proc/mtbias-no-such-dir"), Error);
}

TEST(Render, MalformedStructuredInput) {
  EXPECT_THROW(parse_structured("{}"), FormatError);
  EXPECT_THROW(parse_structured("not json"), FormatError);
}
