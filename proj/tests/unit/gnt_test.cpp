#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mtbias/gnt.hpp"

using namespace mtbias;

namespace {

EvaluationRecord neutral(std::string id, bool found, PredictedGender g, bool ambiguous = false,
                         std::optional<double> pron = std::nullopt) {
  EvaluationRecord r;
  r.instance_id = std::move(id);
  r.profession = "technician";
  r.gold_gender = Gender::Neutral;
  r.stereotype = Stereotype::None;
  r.match.found = found;
  r.match.predicted_gender = g;
  r.match.ambiguous = ambiguous;
  if (found) r.match.word_index = 1;
  if (pron) r.triple = AttributionTriple{0.0, 0.0, *pron};
  return r;
}

}  // namespace

TEST(Gnt, Buckets) {
  EXPECT_EQ(gnt_bucket(neutral("a", false, PredictedGender::Unknown).match), GntBucket::NonMatching);
  EXPECT_EQ(gnt_bucket(neutral("a", true, PredictedGender::Female).match), GntBucket::Female);
  EXPECT_EQ(gnt_bucket(neutral("a", true, PredictedGender::Male).match), GntBucket::Male);
  EXPECT_EQ(gnt_bucket(neutral("a", true, PredictedGender::Unknown, true).match),
            GntBucket::NeutralUnknown);
}

TEST(Gnt, TwoRecordShares) {
  const auto report = analyze_gnt({neutral("a", true, PredictedGender::Male),
                                   neutral("b", false, PredictedGender::Unknown)});
  EXPECT_EQ(report.total, 2u);
  EXPECT_EQ(report.buckets[0].share, 0.0);
  EXPECT_EQ(report.buckets[1].share, 0.5);
  EXPECT_EQ(report.buckets[2].share, 0.0);
  EXPECT_EQ(report.buckets[3].share, 0.5);
  for (const auto& b : report.buckets) EXPECT_FALSE(b.median_pron);
}

TEST(Gnt, EvenMedianAveragesCentralPair) {
  EXPECT_DOUBLE_EQ(median({0.1, 0.3}), 0.2);
  EXPECT_DOUBLE_EQ(median({0.5, 0.1, 0.3}), 0.3);
  EXPECT_THROW(median({}), DomainError);
  const auto report = analyze_gnt({neutral("a", true, PredictedGender::Female, false, 0.3),
                                   neutral("b", true, PredictedGender::Female, false, 0.1)});
  EXPECT_DOUBLE_EQ(*report.buckets[0].median_pron, 0.2);
}

TEST(Gnt, SharesSumToOneAndReorderInvariant) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EvaluationRecord> rs;
    const std::size_t n = 1 + gen() % 20;
    for (std::size_t i = 0; i < n; ++i) {
      const bool found = gen() % 4 != 0;
      const auto g = static_cast<PredictedGender>(gen() % 3);
      rs.push_back(neutral("r" + std::to_string(i), found, found ? g : PredictedGender::Unknown,
                           found && g == PredictedGender::Unknown,
                           found ? std::optional<double>(static_cast<double>(gen() % 1000) / 1000) : std::nullopt));
    }
    const auto a = analyze_gnt(rs);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& b : a.buckets) {
      total += b.share;
      count += b.count;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(count, n);
    std::shuffle(rs.begin(), rs.end(), gen);
    const auto b = analyze_gnt(rs);
    for (std::size_t k = 0; k < 4; ++k) {
      EXPECT_EQ(a.buckets[k].count, b.buckets[k].count);
      EXPECT_EQ(a.buckets[k].median_pron, b.buckets[k].median_pron);
    }
  }
}

TEST(Gnt, Errors) {
  EXPECT_THROW(analyze_gnt({}), DomainError);
  auto r = neutral("a", true, PredictedGender::Male);
  r.gold_gender = Gender::Male;
  EXPECT_THROW(analyze_gnt({r}), DomainError);
}
