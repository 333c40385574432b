#pragma once

// Gender-neutral (they/them/their) subset statistics.

#include <algorithm>
#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "mtbias/error.hpp"
#include "mtbias/metrics.hpp"

namespace mtbias {

enum class GntBucket { Female, Male, NeutralUnknown, NonMatching };

inline constexpr std::array<GntBucket, 4> kGntBuckets = {
    GntBucket::Female, GntBucket::Male, GntBucket::NeutralUnknown, GntBucket::NonMatching};

inline std::string_view to_string(GntBucket b) {
  switch (b) {
    case GntBucket::Female: return "Female";
    case GntBucket::Male: return "Male";
    case GntBucket::NeutralUnknown: return "Neutral/Unknown";
    case GntBucket::NonMatching: return "Non-matching";
  }
  return "?";
}

inline GntBucket gnt_bucket(const ProfessionMatch& m) {
  if (!m.found) return GntBucket::NonMatching;
  if (m.ambiguous || m.predicted_gender == PredictedGender::Unknown) return GntBucket::NeutralUnknown;
  return m.predicted_gender == PredictedGender::Female ? GntBucket::Female : GntBucket::Male;
}

struct GntBucketStats {
  GntBucket bucket = GntBucket::NonMatching;
  std::size_t count = 0;
  double share = 0.0;  // fraction of all neutral records
  std::optional<double> median_pron;
};

struct GntReport {
  std::size_t total = 0;
  std::array<GntBucketStats, 4> buckets;
};

// Median of a non-empty set; even sizes average the central pair.
inline double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

inline GntReport analyze_gnt(const std::vector<EvaluationRecord>& records) {
  if (records.empty()) throw DomainError("gender-neutral analysis of an empty record set");
  GntReport report;
  report.total = records.size();
  std::array<std::vector<double>, 4> scores;
  for (std::size_t k = 0; k < 4; ++k) report.buckets[k].bucket = kGntBuckets[k];
  for (const auto& r : records) {
    if (r.gold_gender != Gender::Neutral) {
      throw DomainError("record " + r.instance_id + " does not have a neutral referent");
    }
    const auto k = static_cast<std::size_t>(gnt_bucket(r.match));
    ++report.buckets[k].count;
    if (r.triple) scores[k].push_back(r.triple->a_pron_prof);
  }
  for (std::size_t k = 0; k < 4; ++k) {
    auto& b = report.buckets[k];
    b.share = static_cast<double>(b.count) / static_cast<double>(report.total);
    if (!scores[k].empty()) b.median_pron = median(scores[k]);
  }
  return report;
}

}  // namespace mtbias
