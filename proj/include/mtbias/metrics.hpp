#pragma once

// Bias metrics over evaluation records: accuracy, ΔG (F1 gap between male
// and female referents), ΔS (accuracy gap between pro- and anti-stereotypical
// subsets), and the attribution breakdowns built on them.
//
// All values are fractions; rendering converts to percentages.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtbias/attribution.hpp"
#include "mtbias/corpus.hpp"
#include "mtbias/error.hpp"
#include "mtbias/lexicon.hpp"

namespace mtbias {

struct EvaluationRecord {
  std::string instance_id;
  std::string profession;
  Gender gold_gender = Gender::Male;
  Stereotype stereotype = Stereotype::None;
  ProfessionMatch match;
  bool correct = false;
  std::optional<AttributionTriple> triple;

  PredictedGender predicted_gender() const { return match.predicted_gender; }
};

inline bool gender_matches(Gender gold, PredictedGender predicted) {
  return (gold == Gender::Male && predicted == PredictedGender::Male) ||
         (gold == Gender::Female && predicted == PredictedGender::Female);
}

inline EvaluationRecord make_record(const WinoMtInstance& inst, const ProfessionMatch& match,
                                    std::optional<AttributionTriple> triple = std::nullopt) {
  EvaluationRecord r;
  r.instance_id = inst.id;
  r.profession = inst.target_profession;
  r.gold_gender = inst.gold_gender;
  r.stereotype = inst.stereotype;
  r.match = match;
  r.correct = gender_matches(inst.gold_gender, match.predicted_gender);
  r.triple = std::move(triple);
  return r;
}

// Records with a male or female referent.
inline std::vector<EvaluationRecord> binary_records(const std::vector<EvaluationRecord>& records) {
  std::vector<EvaluationRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [](const EvaluationRecord& r) { return r.gold_gender != Gender::Neutral; });
  return out;
}

inline double accuracy(const std::vector<EvaluationRecord>& records) {
  if (records.empty()) throw DomainError("accuracy of an empty record set");
  std::size_t correct = 0;
  for (const auto& r : records) {
    if (r.gold_gender == Gender::Neutral) {
      throw DomainError("accuracy: neutral-gold record " + r.instance_id + " must be excluded");
    }
    correct += r.correct ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

struct ClassF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision/recall/F1 of one gender class; empty denominators give 0 and
// Unknown predictions count against recall of both classes.
inline ClassF1 class_f1(const std::vector<EvaluationRecord>& records, Gender cls) {
  const PredictedGender as_pred = cls == Gender::Male ? PredictedGender::Male : PredictedGender::Female;
  std::size_t tp = 0, predicted = 0, gold = 0;
  for (const auto& r : records) {
    const bool p = r.predicted_gender() == as_pred;
    const bool g = r.gold_gender == cls;
    tp += (p && g) ? 1 : 0;
    predicted += p ? 1 : 0;
    gold += g ? 1 : 0;
  }
  ClassF1 out;
  out.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
  out.recall = gold ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
  const double denom = out.precision + out.recall;
  out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
  return out;
}

enum class DeltaGMode {
  // F1(Male) - F1(Female) over the whole set.
  PerClass,
  // Macro F1 of the male-referent subset minus macro F1 of the female-referent
  // subset. Offered for comparison only.
  SubsetMacro,
};

inline double macro_f1(const std::vector<EvaluationRecord>& records) {
  return 0.5 * (class_f1(records, Gender::Male).f1 + class_f1(records, Gender::Female).f1);
}

inline void require_both_classes(const std::vector<EvaluationRecord>& records, const char* what) {
  const bool has_m = std::any_of(records.begin(), records.end(),
                                 [](const auto& r) { return r.gold_gender == Gender::Male; });
  const bool has_f = std::any_of(records.begin(), records.end(),
                                 [](const auto& r) { return r.gold_gender == Gender::Female; });
  if (!has_m || !has_f) {
    throw DomainError(std::string(what) + " needs at least one male and one female referent");
  }
}

inline double delta_g(const std::vector<EvaluationRecord>& records,
                      DeltaGMode mode = DeltaGMode::PerClass) {
  require_both_classes(records, "delta_g");
  if (mode == DeltaGMode::PerClass) {
    return class_f1(records, Gender::Male).f1 - class_f1(records, Gender::Female).f1;
  }
  std::vector<EvaluationRecord> male, female;
  for (const auto& r : records) {
    if (r.gold_gender == Gender::Male) male.push_back(r);
    if (r.gold_gender == Gender::Female) female.push_back(r);
  }
  return macro_f1(male) - macro_f1(female);
}

inline std::vector<EvaluationRecord> subset(const std::vector<EvaluationRecord>& records,
                                            Stereotype s) {
  std::vector<EvaluationRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [s](const EvaluationRecord& r) { return r.stereotype == s; });
  return out;
}

inline double delta_s(const std::vector<EvaluationRecord>& records) {
  const auto pro = subset(records, Stereotype::Pro);
  const auto anti = subset(records, Stereotype::Anti);
  if (pro.empty() || anti.empty()) {
    throw DomainError("delta_s needs both pro- and anti-stereotypical records");
  }
  return accuracy(pro) - accuracy(anti);
}

struct CellStats {
  Stereotype stereotype = Stereotype::None;
  Gender gold_gender = Gender::Male;
  std::size_t count = 0;
  std::size_t matched = 0;
  std::optional<double> accuracy;
  std::optional<double> mean_ctrl;
  std::optional<double> mean_prof;
  std::optional<double> mean_pron;
};

// The four binary cells always appear, in the order Pro-F, Pro-M, Anti-F,
// Anti-M; other cells (neutral, untagged) follow when non-empty.
inline std::vector<CellStats> disaggregate(const std::vector<EvaluationRecord>& records) {
  std::vector<std::pair<Stereotype, Gender>> order = {
      {Stereotype::Pro, Gender::Female},
      {Stereotype::Pro, Gender::Male},
      {Stereotype::Anti, Gender::Female},
      {Stereotype::Anti, Gender::Male},
      {Stereotype::None, Gender::Female},
      {Stereotype::None, Gender::Male},
      {Stereotype::None, Gender::Neutral},
  };

  std::vector<CellStats> cells;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto [s, g] = order[k];
    CellStats cell;
    cell.stereotype = s;
    cell.gold_gender = g;
    std::size_t correct = 0;
    double ctrl = 0.0, prof = 0.0, pron = 0.0;
    for (const auto& r : records) {
      if (r.stereotype != s || r.gold_gender != g) continue;
      ++cell.count;
      correct += r.correct ? 1 : 0;
      if (r.triple) {
        ++cell.matched;
        ctrl += r.triple->a_ctrl_prof;
        prof += r.triple->a_prof_prof;
        pron += r.triple->a_pron_prof;
      }
    }
    if (cell.count == 0 && k >= 4) continue;
    if (cell.count > 0 && g != Gender::Neutral) {
      cell.accuracy = static_cast<double>(correct) / static_cast<double>(cell.count);
    }
    if (cell.matched > 0) {
      const auto n = static_cast<double>(cell.matched);
      cell.mean_ctrl = ctrl / n;
      cell.mean_prof = prof / n;
      cell.mean_pron = pron / n;
    }
    cells.push_back(cell);
  }
  return cells;
}

enum class Score { Ctrl, Prof, Pron };

inline double select_score(const AttributionTriple& t, Score s) {
  switch (s) {
    case Score::Ctrl: return t.a_ctrl_prof;
    case Score::Prof: return t.a_prof_prof;
    case Score::Pron: return t.a_pron_prof;
  }
  return 0.0;
}

// 100 * (mean over correct - mean over wrong) / mean over wrong, using
// matched records only.
inline double correct_wrong_relative_diff(const std::vector<EvaluationRecord>& records,
                                          Score score) {
  double sum_ok = 0.0, sum_bad = 0.0;
  std::size_t n_ok = 0, n_bad = 0;
  for (const auto& r : records) {
    if (!r.triple) continue;
    const double v = select_score(*r.triple, score);
    if (r.correct) {
      sum_ok += v;
      ++n_ok;
    } else {
      sum_bad += v;
      ++n_bad;
    }
  }
  if (n_ok == 0 || n_bad == 0) {
    throw DomainError("relative difference needs matched correct and wrong records");
  }
  const double mean_ok = sum_ok / static_cast<double>(n_ok);
  const double mean_bad = sum_bad / static_cast<double>(n_bad);
  if (mean_bad == 0.0) throw DomainError("relative difference: wrong-set mean is zero");
  return 100.0 * (mean_ok - mean_bad) / mean_bad;
}

struct PerProfessionDeltaG {
  std::map<std::string, double> delta_g;
  // Professions lacking a male or a female referent.
  std::vector<std::string> omitted;
};

inline PerProfessionDeltaG per_profession_delta_g(const std::vector<EvaluationRecord>& records) {
  std::map<std::string, std::vector<EvaluationRecord>> by_prof;
  for (const auto& r : records) {
    if (r.gold_gender != Gender::Neutral) by_prof[to_lower(r.profession)].push_back(r);
  }
  PerProfessionDeltaG out;
  for (const auto& [prof, rs] : by_prof) {
    const bool has_m = std::any_of(rs.begin(), rs.end(),
                                   [](const auto& r) { return r.gold_gender == Gender::Male; });
    const bool has_f = std::any_of(rs.begin(), rs.end(),
                                   [](const auto& r) { return r.gold_gender == Gender::Female; });
    if (has_m && has_f) out.delta_g.emplace(prof, delta_g(rs));
    else out.omitted.push_back(prof);
  }
  return out;
}

struct BiasReport {
  double accuracy = 0.0;
  double delta_g = 0.0;
  std::optional<double> delta_s;
  std::vector<CellStats> cells;
  PerProfessionDeltaG per_profession;
};

// Neutral-gold records are excluded from every figure except the cell table.
inline BiasReport bias_report(const std::vector<EvaluationRecord>& records) {
  const auto binary = binary_records(records);
  BiasReport report;
  report.accuracy = accuracy(binary);
  report.delta_g = delta_g(binary);
  if (!subset(binary, Stereotype::Pro).empty() && !subset(binary, Stereotype::Anti).empty()) {
    report.delta_s = delta_s(binary);
  }
  report.cells = disaggregate(records);
  report.per_profession = per_profession_delta_g(records);
  return report;
}

}  // namespace mtbias
