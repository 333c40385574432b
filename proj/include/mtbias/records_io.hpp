#pragma once

// JSON encodings of the intermediate artifacts exchanged between pipeline
// stages (one JSON object per line for record streams).

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtbias/attribution.hpp"
#include "mtbias/corpus.hpp"
#include "mtbias/debias.hpp"
#include "mtbias/error.hpp"
#include "mtbias/lexicon.hpp"
#include "mtbias/metrics.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

namespace detail {

template <typename Enum, typename Parse>
Enum enum_from(const nlohmann::json& j, Parse parse, const char* what) {
  const auto s = j.get<std::string>();
  if (auto v = parse(s)) return *v;
  throw FormatError(std::string("unknown ") + what + " '" + s + "'");
}

inline std::optional<PredictedGender> parse_predicted(std::string_view s) {
  if (s == "male") return PredictedGender::Male;
  if (s == "female") return PredictedGender::Female;
  if (s == "unknown") return PredictedGender::Unknown;
  return std::nullopt;
}

inline std::optional<InflectedForm> parse_form(std::string_view s) {
  if (s == "masculine") return InflectedForm::Masculine;
  if (s == "feminine") return InflectedForm::Feminine;
  if (s == "neutral") return InflectedForm::Neutral;
  return std::nullopt;
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const ProfessionMatch& m) {
  j = nlohmann::json{{"found", m.found}, {"ambiguous", m.ambiguous},
                     {"predicted_gender", std::string(to_string(m.predicted_gender))}};
  j["word_index"] = m.word_index ? nlohmann::json(*m.word_index) : nlohmann::json(nullptr);
  j["matched_form"] =
      m.matched_form ? nlohmann::json(std::string(to_string(*m.matched_form))) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, ProfessionMatch& m) {
  m.found = j.at("found").get<bool>();
  m.ambiguous = j.at("ambiguous").get<bool>();
  m.predicted_gender =
      detail::enum_from<PredictedGender>(j.at("predicted_gender"), detail::parse_predicted, "gender");
  m.word_index.reset();
  m.matched_form.reset();
  if (!j.at("word_index").is_null()) m.word_index = j["word_index"].get<std::size_t>();
  if (!j.at("matched_form").is_null()) {
    m.matched_form = detail::enum_from<InflectedForm>(j["matched_form"], detail::parse_form, "form");
  }
}

inline void to_json(nlohmann::json& j, const AttributionTriple& t) {
  j = nlohmann::json{{"a_ctrl_prof", t.a_ctrl_prof},
                     {"a_prof_prof", t.a_prof_prof},
                     {"a_pron_prof", t.a_pron_prof},
                     {"source_prof_index", t.source_prof_index},
                     {"source_pron_index", t.source_pron_index},
                     {"target_prof_index", t.target_prof_index}};
}

inline void from_json(const nlohmann::json& j, AttributionTriple& t) {
  t.a_ctrl_prof = j.at("a_ctrl_prof").get<double>();
  t.a_prof_prof = j.at("a_prof_prof").get<double>();
  t.a_pron_prof = j.at("a_pron_prof").get<double>();
  t.source_prof_index = j.at("source_prof_index").get<std::size_t>();
  t.source_pron_index = j.at("source_pron_index").get<std::size_t>();
  t.target_prof_index = j.at("target_prof_index").get<std::size_t>();
  t.matched = true;
}

inline void to_json(nlohmann::json& j, const EvaluationRecord& r) {
  j = nlohmann::json{{"instance_id", r.instance_id},
                     {"profession", r.profession},
                     {"gold_gender", std::string(to_string(r.gold_gender))},
                     {"stereotype", std::string(to_string(r.stereotype))},
                     {"match", r.match},
                     {"correct", r.correct}};
  j["triple"] = r.triple ? nlohmann::json(*r.triple) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, EvaluationRecord& r) {
  r.instance_id = j.at("instance_id").get<std::string>();
  r.profession = j.at("profession").get<std::string>();
  r.gold_gender = detail::enum_from<Gender>(j.at("gold_gender"), parse_gender, "gender");
  r.stereotype = detail::enum_from<Stereotype>(j.at("stereotype"), parse_stereotype, "stereotype");
  r.match = j.at("match").get<ProfessionMatch>();
  r.correct = j.at("correct").get<bool>();
  r.triple.reset();
  if (!j.at("triple").is_null()) r.triple = j["triple"].get<AttributionTriple>();
}

inline void to_json(nlohmann::json& j, const WordAttributionMatrix& m) {
  j = nlohmann::json{{"source_words", m.source_words},
                     {"target_words", m.target_words},
                     {"values", m.values}};
}

inline void from_json(const nlohmann::json& j, WordAttributionMatrix& m) {
  m.source_words = j.at("source_words").get<std::size_t>();
  m.target_words = j.at("target_words").get<std::size_t>();
  m.values = j.at("values").get<std::vector<double>>();
  if (m.values.size() != m.source_words * m.target_words) {
    throw FormatError("attribution matrix size does not match its shape");
  }
}

inline void to_json(nlohmann::json& j, const Exemplar& e) {
  j = nlohmann::json{{"instance_id", e.instance_id},
                     {"source_text", e.source_text},
                     {"stereotype", std::string(to_string(e.stratum.stereotype))},
                     {"gold_gender", std::string(to_string(e.stratum.gender))},
                     {"a_pron_prof", e.a_pron_prof}};
  if (e.human_translations) {
    j["nt_female"] = e.human_translations->nt_female;
    j["nt_male"] = e.human_translations->nt_male;
  }
  if (e.target_text) j["target_text"] = *e.target_text;
}

inline void from_json(const nlohmann::json& j, Exemplar& e) {
  e.instance_id = j.at("instance_id").get<std::string>();
  e.source_text = j.at("source_text").get<std::string>();
  e.stratum.stereotype =
      detail::enum_from<Stereotype>(j.at("stereotype"), parse_stereotype, "stereotype");
  e.stratum.gender = detail::enum_from<Gender>(j.at("gold_gender"), parse_gender, "gender");
  e.a_pron_prof = j.at("a_pron_prof").get<double>();
  e.human_translations.reset();
  e.target_text.reset();
  if (j.contains("nt_female") && j.contains("nt_male")) {
    e.human_translations = HumanTranslation{j["nt_female"].get<std::string>(),
                                            j["nt_male"].get<std::string>()};
  }
  if (j.contains("target_text")) e.target_text = j["target_text"].get<std::string>();
}

inline void to_json(nlohmann::json& j, const ExemplarSet& s) {
  j = nlohmann::json{{"n", s.n},
                     {"nt_policy", std::string(to_string(s.nt_policy))},
                     {"rng_seed", s.rng_seed},
                     {"exemplars", s.exemplars}};
}

inline void from_json(const nlohmann::json& j, ExemplarSet& s) {
  s.n = j.at("n").get<std::size_t>();
  s.nt_policy = detail::enum_from<NtPolicy>(j.at("nt_policy"), parse_nt_policy, "NT policy");
  s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  s.exemplars = j.at("exemplars").get<std::vector<Exemplar>>();
}

template <typename T>
std::string to_jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) {
    out += nlohmann::json(item).dump();
    out += '\n';
  }
  return out;
}

template <typename T>
std::vector<T> from_jsonl(std::string_view bytes) {
  std::vector<T> out;
  const auto lines = split_lines(bytes);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(lines[n]).get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n + 1, e.what());
    }
  }
  return out;
}

inline std::vector<EvaluationRecord> load_records(const std::filesystem::path& path) {
  return from_jsonl<EvaluationRecord>(read_file(path));
}

inline void save_records(const std::vector<EvaluationRecord>& records,
                         const std::filesystem::path& path) {
  write_file(path, to_jsonl(records));
}

}  // namespace mtbias
