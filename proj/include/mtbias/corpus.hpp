#pragma once

// WinoMT-style bias corpora.
//
// One instance per line, tab separated:
//
//   gender  pronoun_index  sentence  profession  [pro|anti|none]
//
// gender is male|female|neutral and pronoun_index is a 0-based index into
// the whitespace words of the sentence.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mtbias/error.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

enum class Gender { Male, Female, Neutral };
enum class Stereotype { Pro, Anti, None };

inline std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::Male: return "male";
    case Gender::Female: return "female";
    case Gender::Neutral: return "neutral";
  }
  return "?";
}

inline std::string_view to_string(Stereotype s) {
  switch (s) {
    case Stereotype::Pro: return "pro";
    case Stereotype::Anti: return "anti";
    case Stereotype::None: return "none";
  }
  return "?";
}

inline std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "male") return Gender::Male;
  if (s == "female") return Gender::Female;
  if (s == "neutral") return Gender::Neutral;
  return std::nullopt;
}

inline std::optional<Stereotype> parse_stereotype(std::string_view s) {
  if (s == "pro") return Stereotype::Pro;
  if (s == "anti") return Stereotype::Anti;
  if (s == "none") return Stereotype::None;
  return std::nullopt;
}

inline constexpr std::array<std::string_view, 9> kPronouns = {
    "he", "she", "his", "her", "him", "hers", "they", "them", "their"};

inline bool is_pronoun(std::string_view normalized) {
  return std::find(kPronouns.begin(), kPronouns.end(), normalized) != kPronouns.end();
}

inline bool is_neutral_pronoun(std::string_view normalized) {
  return normalized == "they" || normalized == "them" || normalized == "their";
}

struct WinoMtInstance {
  std::string id;
  Gender gold_gender = Gender::Male;
  std::size_t pronoun_index = 0;
  std::string source_text;
  std::string target_profession;
  Stereotype stereotype = Stereotype::None;
  // Whether the stereotype came from a fifth column (kept for serialization).
  bool tag_column = false;
};

// Word span [first, last] of `phrase` inside `sentence`, comparing normalized
// words. Returns the first occurrence.
inline std::optional<std::pair<std::size_t, std::size_t>> find_word_span(
    std::string_view sentence, std::string_view phrase) {
  const auto hay = normalized_words(sentence);
  const auto needle = normalized_words(phrase);
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) {
      return std::make_pair(i, i + needle.size() - 1);
    }
  }
  return std::nullopt;
}

// Throws ValidationError describing the first violated invariant.
inline void validate(const WinoMtInstance& inst) {
  const auto ws = words(inst.source_text);
  const std::string where = "instance " + inst.id + ": ";
  if (inst.pronoun_index >= ws.size()) {
    throw ValidationError(where + "pronoun index " + std::to_string(inst.pronoun_index) +
                          " out of bounds for " + std::to_string(ws.size()) + " words");
  }
  const auto pron = normalize_word(ws[inst.pronoun_index]);
  if (!is_pronoun(pron)) {
    throw ValidationError(where + "word '" + ws[inst.pronoun_index] + "' at pronoun index " +
                          std::to_string(inst.pronoun_index) + " is not a pronoun");
  }
  if (is_neutral_pronoun(pron) != (inst.gold_gender == Gender::Neutral)) {
    throw ValidationError(where + "pronoun '" + pron + "' disagrees with gold gender " +
                          std::string(to_string(inst.gold_gender)));
  }
  if (!find_word_span(inst.source_text, inst.target_profession)) {
    throw ValidationError(where + "profession '" + inst.target_profession +
                          "' does not occur in the sentence");
  }
}

struct ParseOptions {
  // Applied to every line that has no fifth column.
  std::optional<Stereotype> stereotype_tag;
  // Prepended to generated `line:<n>` ids so several subset files can merge.
  std::string id_prefix;
  // When false, gendered lines without any tag load as Stereotype::None
  // (they then drop out of ΔS). Needed for untagged full-corpus files.
  bool require_stereotype = true;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::pair<std::string, std::string> language_pair, std::vector<WinoMtInstance> instances)
      : language_pair_(std::move(language_pair)), instances_(std::move(instances)) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      if (!seen.insert(instances_[i].id).second) {
        throw ValidationError("duplicate instance id '" + instances_[i].id + "'");
      }
      index_.emplace(instances_[i].id, i);
    }
  }

  const std::pair<std::string, std::string>& language_pair() const { return language_pair_; }
  const std::vector<WinoMtInstance>& instances() const { return instances_; }
  std::size_t size() const { return instances_.size(); }

  const WinoMtInstance* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &instances_[it->second];
  }

  const WinoMtInstance& at(std::string_view id) const {
    const auto* inst = find(id);
    if (!inst) throw ValidationError("unknown instance id '" + std::string(id) + "'");
    return *inst;
  }

  std::size_t count(Gender g, Stereotype s) const {
    return static_cast<std::size_t>(std::count_if(
        instances_.begin(), instances_.end(),
        [&](const WinoMtInstance& x) { return x.gold_gender == g && x.stereotype == s; }));
  }

  std::size_t count(Gender g) const {
    return static_cast<std::size_t>(std::count_if(
        instances_.begin(), instances_.end(),
        [&](const WinoMtInstance& x) { return x.gold_gender == g; }));
  }

 private:
  std::pair<std::string, std::string> language_pair_{"en", ""};
  std::vector<WinoMtInstance> instances_;
  std::map<std::string, std::size_t> index_;
};

inline Corpus parse_corpus_text(std::string_view bytes, const ParseOptions& options = {},
                                std::pair<std::string, std::string> language_pair = {"en", ""}) {
  std::vector<WinoMtInstance> instances;
  const auto lines = split_lines(bytes);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    const auto fields = split_tabs(lines[n]);
    if (fields.size() != 4 && fields.size() != 5) {
      throw ParseError(line_no, "expected 4 or 5 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    WinoMtInstance inst;
    inst.id = options.id_prefix + "line:" + std::to_string(line_no);
    const auto gender = parse_gender(fields[0]);
    if (!gender) throw ParseError(line_no, "unknown gender token '" + fields[0] + "'");
    inst.gold_gender = *gender;

    const auto& idx = fields[1];
    if (idx.empty() || !std::all_of(idx.begin(), idx.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw ParseError(line_no, "pronoun index '" + idx + "' is not a non-negative integer");
    }
    try {
      inst.pronoun_index = static_cast<std::size_t>(std::stoull(idx));
    } catch (const std::exception&) {
      throw ParseError(line_no, "pronoun index '" + idx + "' out of range");
    }
    inst.source_text = fields[2];
    inst.target_profession = fields[3];

    if (fields.size() == 5) {
      const auto tag = parse_stereotype(fields[4]);
      if (!tag) throw ParseError(line_no, "unknown stereotype tag '" + fields[4] + "'");
      if (options.stereotype_tag && *options.stereotype_tag != *tag) {
        throw ValidationError("line " + std::to_string(line_no) + ": stereotype column '" +
                              fields[4] + "' contradicts the subset tag");
      }
      inst.stereotype = *tag;
      inst.tag_column = true;
    } else if (inst.gold_gender == Gender::Neutral) {
      inst.stereotype = Stereotype::None;
    } else if (options.stereotype_tag) {
      inst.stereotype = *options.stereotype_tag;
    } else if (options.require_stereotype) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": gendered instance has no stereotype tag (add a fifth column or "
                            "load the file with a subset tag)");
    }

    if (inst.stereotype == Stereotype::None && inst.gold_gender != Gender::Neutral &&
        options.require_stereotype) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": stereotype 'none' is only valid for neutral instances");
    }
    if (inst.gold_gender == Gender::Neutral && inst.stereotype != Stereotype::None) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": neutral instances cannot be pro- or anti-stereotypical");
    }
    try {
      validate(inst);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
    instances.push_back(std::move(inst));
  }
  return Corpus(std::move(language_pair), std::move(instances));
}

inline Corpus parse_corpus(const std::filesystem::path& path, const ParseOptions& options = {},
                           std::pair<std::string, std::string> language_pair = {"en", ""}) {
  return parse_corpus_text(read_file(path), options, std::move(language_pair));
}

// Inverse of parse_corpus_text for instances loaded from a file.
inline std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& inst : corpus.instances()) {
    out += to_string(inst.gold_gender);
    out += '\t';
    out += std::to_string(inst.pronoun_index);
    out += '\t';
    out += inst.source_text;
    out += '\t';
    out += inst.target_profession;
    if (inst.tag_column) {
      out += '\t';
      out += to_string(inst.stereotype);
    }
    out += '\n';
  }
  return out;
}

// Concatenates corpora (e.g. pro and anti subset files). Ids must stay unique.
inline Corpus merge_corpora(const std::vector<Corpus>& parts) {
  std::vector<WinoMtInstance> all;
  std::pair<std::string, std::string> lp{"en", ""};
  for (const auto& c : parts) {
    lp = c.language_pair();
    all.insert(all.end(), c.instances().begin(), c.instances().end());
  }
  return Corpus(std::move(lp), std::move(all));
}

}  // namespace mtbias
