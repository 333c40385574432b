#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "mtbias/metrics.hpp"

using namespace mtbias;

namespace {

EvaluationRecord rec(Gender gold, PredictedGender pred, Stereotype s = Stereotype::Pro,
                     std::string prof = "pilot") {
  EvaluationRecord r;
  static int next_id = 0;
  r.instance_id = "r" + std::to_string(next_id++);
  r.profession = std::move(prof);
  r.gold_gender = gold;
  r.stereotype = s;
  r.match.found = pred != PredictedGender::Unknown;
  r.match.predicted_gender = pred;
  r.correct = gender_matches(gold, pred);
  return r;
}

constexpr auto M = Gender::Male;
constexpr auto F = Gender::Female;
constexpr auto PM = PredictedGender::Male;
constexpr auto PF = PredictedGender::Female;
constexpr auto PU = PredictedGender::Unknown;

// Confusion-matrix oracle: F1 = 2TP / (2TP + FP + FN).
struct Confusion {
  int counts[2][3] = {};  // [gold M/F][pred M/F/U]

  explicit Confusion(const std::vector<EvaluationRecord>& rs) {
    for (const auto& r : rs) {
      counts[r.gold_gender == F][static_cast<int>(r.predicted_gender())]++;
    }
  }
  double f1(int cls) const {
    const int tp = counts[cls][cls];
    const int fp = counts[1 - cls][cls];
    const int fn = counts[cls][1 - cls] + counts[cls][2];
    const int denom = 2 * tp + fp + fn;
    return denom ? 2.0 * tp / denom : 0.0;
  }
  double acc() const {
    const int total = counts[0][0] + counts[0][1] + counts[0][2] + counts[1][0] + counts[1][1] +
                      counts[1][2];
    return static_cast<double>(counts[0][0] + counts[1][1]) / total;
  }
};

std::vector<EvaluationRecord> random_records(std::mt19937_64& gen, std::size_t n) {
  std::vector<EvaluationRecord> rs;
  const std::vector<std::string> profs = {"pilot", "nurse", "baker"};
  for (std::size_t i = 0; i < n; ++i) {
    rs.push_back(rec(gen() % 2 ? M : F, static_cast<PredictedGender>(gen() % 3),
                     gen() % 2 ? Stereotype::Pro : Stereotype::Anti, profs[gen() % 3]));
  }
  // Ensure every metric is defined.
  rs.push_back(rec(M, PM, Stereotype::Pro));
  rs.push_back(rec(F, PF, Stereotype::Anti));
  return rs;
}

Gender swap(Gender g) { return g == M ? F : g == F ? M : g; }
PredictedGender swap(PredictedGender p) { return p == PM ? PF : p == PF ? PM : p; }

}  // namespace

TEST(Accuracy, HandCase) {
  const std::vector<EvaluationRecord> rs = {rec(M, PM), rec(M, PM), rec(F, PM), rec(F, PF)};
  EXPECT_DOUBLE_EQ(accuracy(rs), 0.75);
  EXPECT_DOUBLE_EQ(accuracy({rec(M, PM), rec(F, PF)}), 1.0);
  EXPECT_THROW(accuracy({}), DomainError);
  EXPECT_THROW(accuracy({rec(Gender::Neutral, PU, Stereotype::None)}), DomainError);
}

TEST(DeltaG, HandCase) {
  const std::vector<EvaluationRecord> rs = {rec(M, PM), rec(M, PM), rec(F, PM), rec(F, PF)};
  EXPECT_NEAR(class_f1(rs, M).f1, 0.8, 1e-12);
  EXPECT_NEAR(class_f1(rs, F).f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(delta_g(rs), 0.8 - 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(delta_g(rs), 0.1333, 1e-4);
}

TEST(DeltaG, PerfectIsZero) {
  EXPECT_EQ(delta_g({rec(M, PM), rec(F, PF), rec(F, PF)}), 0.0);
}

TEST(DeltaG, MissingClassThrows) {
  EXPECT_THROW(delta_g({rec(M, PM), rec(M, PF)}), DomainError);
}

TEST(DeltaG, UnknownCountsAgainstBothClasses) {
  // M: TP 1, FN 1 (unknown) -> P 1, R 0.5. F: TP 1 -> 1.
  const std::vector<EvaluationRecord> rs = {rec(M, PM), rec(M, PU), rec(F, PF)};
  EXPECT_NEAR(class_f1(rs, M).f1, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(class_f1(rs, F).f1, 1.0, 1e-12);
}

TEST(DeltaG, SubsetMacroModeDiffers) {
  const std::vector<EvaluationRecord> rs = {rec(M, PM), rec(M, PM), rec(F, PM), rec(F, PF)};
  // Male subset: F1_M = 1, F1_F = 0 -> 0.5. Female subset: F1_M = 0, F1_F = 2/3 -> 1/3.
  EXPECT_NEAR(delta_g(rs, DeltaGMode::SubsetMacro), 0.5 - 1.0 / 3.0, 1e-12);
}

TEST(DeltaS, HandCase) {
  const std::vector<EvaluationRecord> rs = {
      rec(M, PM, Stereotype::Pro), rec(F, PF, Stereotype::Pro), rec(F, PM, Stereotype::Anti),
      rec(M, PF, Stereotype::Anti), rec(M, PM, Stereotype::Anti)};
  // Anti 1/3.
  EXPECT_NEAR(delta_s(rs), 1.0 - 1.0 / 3.0, 1e-12);
  const std::vector<EvaluationRecord> half = {
      rec(M, PM, Stereotype::Pro), rec(F, PF, Stereotype::Pro), rec(F, PM, Stereotype::Anti),
      rec(M, PM, Stereotype::Anti)};
  EXPECT_DOUBLE_EQ(delta_s(half), 0.5);
  EXPECT_THROW(delta_s({rec(M, PM, Stereotype::Pro)}), DomainError);
}

// Every assignment of gold in {M, F} and prediction in {M, F, Unknown} for
// up to six records, against the confusion-matrix oracle.
TEST(Metrics, ExhaustiveConfusionOracle) {
  for (std::size_t n = 2; n <= 6; ++n) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= 6;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<EvaluationRecord> rs;
      std::size_t c = code;
      for (std::size_t i = 0; i < n; ++i, c /= 6) {
        rs.push_back(rec((c % 6) / 3 ? F : M, static_cast<PredictedGender>(c % 3)));
      }
      const Confusion oracle(rs);
      ASSERT_NEAR(accuracy(rs), oracle.acc(), 1e-12);
      ASSERT_NEAR(class_f1(rs, M).f1, oracle.f1(0), 1e-12);
      ASSERT_NEAR(class_f1(rs, F).f1, oracle.f1(1), 1e-12);
      const bool both = oracle.counts[0][0] + oracle.counts[0][1] + oracle.counts[0][2] > 0 &&
                        oracle.counts[1][0] + oracle.counts[1][1] + oracle.counts[1][2] > 0;
      if (both) {
        ASSERT_NEAR(delta_g(rs), oracle.f1(0) - oracle.f1(1), 1e-12);
      } else {
        ASSERT_THROW(delta_g(rs), DomainError);
      }
    }
  }
}

TEST(Metrics, SymmetryProperties) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    auto rs = random_records(gen, 1 + gen() % 30);
    const double acc = accuracy(rs);
    const double dg = delta_g(rs);
    const double ds = delta_s(rs);
    EXPECT_GE(acc, 0.0);
    EXPECT_LE(acc, 1.0);
    EXPECT_GE(dg, -1.0);
    EXPECT_LE(dg, 1.0);

    auto shuffled = rs;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_NEAR(accuracy(shuffled), acc, 1e-12);
    EXPECT_NEAR(delta_g(shuffled), dg, 1e-12);
    EXPECT_NEAR(delta_s(shuffled), ds, 1e-12);

    auto swapped = rs;
    for (auto& r : swapped) {
      r.gold_gender = swap(r.gold_gender);
      r.match.predicted_gender = swap(r.match.predicted_gender);
    }
    EXPECT_NEAR(delta_g(swapped), -dg, 1e-12);
    EXPECT_NEAR(accuracy(swapped), acc, 1e-12);

    auto flipped = rs;
    for (auto& r : flipped) {
      r.stereotype = r.stereotype == Stereotype::Pro ? Stereotype::Anti : Stereotype::Pro;
    }
    EXPECT_NEAR(delta_s(flipped), -ds, 1e-12);
  }
}

TEST(Disaggregate, SingletonAndMeans) {
  auto a = rec(F, PF, Stereotype::Anti);
  a.triple = AttributionTriple{0.1, 0.2, 0.3};
  auto cells = disaggregate({a});
  ASSERT_EQ(cells.size(), 4u);
  const auto& anti_f = cells[2];
  EXPECT_EQ(anti_f.stereotype, Stereotype::Anti);
  EXPECT_EQ(anti_f.gold_gender, F);
  EXPECT_EQ(anti_f.accuracy, 1.0);
  EXPECT_EQ(anti_f.mean_ctrl, 0.1);
  EXPECT_EQ(anti_f.mean_prof, 0.2);
  EXPECT_EQ(anti_f.mean_pron, 0.3);
  EXPECT_EQ(cells[0].count, 0u);
  EXPECT_FALSE(cells[0].accuracy);

  auto b = rec(F, PM, Stereotype::Anti);
  b.triple = AttributionTriple{0.3, 0.5, 0.4};
  auto c = rec(F, PU, Stereotype::Anti);
  cells = disaggregate({a, b, c});
  EXPECT_EQ(cells[2].count, 3u);
  EXPECT_EQ(cells[2].matched, 2u);
  EXPECT_NEAR(*cells[2].mean_ctrl, 0.2, 1e-12);
  EXPECT_NEAR(*cells[2].mean_pron, 0.35, 1e-12);
  EXPECT_NEAR(*cells[2].accuracy, 1.0 / 3.0, 1e-12);
}

TEST(Disaggregate, NeutralCellAppendedWhenPresent) {
  auto cells = disaggregate({rec(M, PM), rec(Gender::Neutral, PU, Stereotype::None)});
  ASSERT_EQ(cells.size(), 5u);
  EXPECT_EQ(cells[4].gold_gender, Gender::Neutral);
  EXPECT_FALSE(cells[4].accuracy);
}

TEST(RelativeDiff, ByHand) {
  auto make = [](bool correct, double pron) {
    auto r = rec(M, correct ? PM : PF);
    r.triple = AttributionTriple{0.0, 0.0, pron};
    return r;
  };
  EXPECT_NEAR(correct_wrong_relative_diff({make(true, 0.9), make(false, 1.0)}, Score::Pron), -10.0,
              1e-9);
  EXPECT_NEAR(correct_wrong_relative_diff({make(true, 0.5), make(false, 0.5)}, Score::Pron), 0.0,
              1e-12);
  EXPECT_THROW(correct_wrong_relative_diff({make(true, 0.5)}, Score::Pron), DomainError);
  EXPECT_THROW(correct_wrong_relative_diff({make(true, 0.5), make(false, 0.0)}, Score::Pron),
               DomainError);
}

TEST(PerProfession, TwoInstanceCase) {
  const auto out = per_profession_delta_g(
      {rec(M, PM, Stereotype::Pro, "lawyer"), rec(F, PM, Stereotype::Anti, "lawyer"),
       rec(M, PM, Stereotype::Pro, "baker"), rec(F, PF, Stereotype::Anti, "baker"),
       rec(M, PM, Stereotype::Pro, "Pilot")});
  EXPECT_NEAR(out.delta_g.at("lawyer"), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(out.delta_g.at("baker"), 0.0);
  EXPECT_EQ(out.omitted, std::vector<std::string>{"pilot"});
}

TEST(BiasReport, ExcludesNeutral) {
  const auto report = bias_report({rec(M, PM, Stereotype::Pro), rec(F, PM, Stereotype::Anti),
                                   rec(Gender::Neutral, PU, Stereotype::None)});
  EXPECT_DOUBLE_EQ(report.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(*report.delta_s, 1.0);
  EXPECT_EQ(report.cells.size(), 5u);
}
