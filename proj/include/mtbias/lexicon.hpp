#pragma once

// Gendered profession lexicon and dictionary-based profession matching on
// MT output.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtbias/error.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

enum class PredictedGender { Male, Female, Unknown };
enum class InflectedForm { Masculine, Feminine, Neutral };

inline std::string_view to_string(PredictedGender g) {
  switch (g) {
    case PredictedGender::Male: return "male";
    case PredictedGender::Female: return "female";
    case PredictedGender::Unknown: return "unknown";
  }
  return "?";
}

inline std::string_view to_string(InflectedForm f) {
  switch (f) {
    case InflectedForm::Masculine: return "masculine";
    case InflectedForm::Feminine: return "feminine";
    case InflectedForm::Neutral: return "neutral";
  }
  return "?";
}

struct LexiconEntry {
  std::string masculine;
  std::string feminine;
  std::optional<std::string> neutral;

  bool epicene() const { return normalized_words(masculine) == normalized_words(feminine); }
};

class GenderLexicon {
 public:
  GenderLexicon() = default;
  explicit GenderLexicon(std::string language) : language_(std::move(language)) {}

  const std::string& language() const { return language_; }
  const std::map<std::string, LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Keys are lowercased. Throws ValidationError on duplicates or empty forms.
  void add(std::string_view profession, LexiconEntry entry) {
    const auto key = to_lower(profession);
    if (key.empty()) throw ValidationError("empty profession key");
    if (normalized_words(entry.masculine).empty() || normalized_words(entry.feminine).empty() ||
        (entry.neutral && normalized_words(*entry.neutral).empty())) {
      throw ValidationError("empty form for profession '" + key + "'");
    }
    if (!entries_.emplace(key, std::move(entry)).second) {
      throw ValidationError("duplicate profession '" + key + "'");
    }
  }

  const LexiconEntry* find(std::string_view profession) const {
    auto it = entries_.find(to_lower(profession));
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  std::string language_;
  std::map<std::string, LexiconEntry> entries_;
};

inline GenderLexicon parse_lexicon_text(std::string_view bytes, std::string language) {
  GenderLexicon lex(std::move(language));
  const auto lines = split_lines(bytes);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto fields = split_tabs(lines[n]);
    if (fields.size() != 3 && fields.size() != 4) {
      throw ParseError(n + 1, "expected 3 or 4 tab-separated fields, got " +
                                  std::to_string(fields.size()));
    }
    LexiconEntry e{fields[1], fields[2], std::nullopt};
    if (fields.size() == 4) e.neutral = fields[3];
    try {
      lex.add(fields[0], std::move(e));
    } catch (const ValidationError& err) {
      throw ValidationError("line " + std::to_string(n + 1) + ": " + err.what());
    }
  }
  return lex;
}

inline GenderLexicon load_lexicon(const std::filesystem::path& path, std::string language) {
  return parse_lexicon_text(read_file(path), std::move(language));
}

struct ProfessionMatch {
  bool found = false;
  std::optional<std::size_t> word_index;
  std::optional<InflectedForm> matched_form;
  bool ambiguous = false;
  PredictedGender predicted_gender = PredictedGender::Unknown;
};

// Determiner -> gender for resolving epicene nouns.
inline std::optional<PredictedGender> determiner_gender(std::string_view language,
                                                        std::string_view word) {
  if (language == "es") {
    if (word == "el" || word == "los" || word == "un") return PredictedGender::Male;
    if (word == "la" || word == "las" || word == "una") return PredictedGender::Female;
  } else if (language == "de") {
    if (word == "der" || word == "ein") return PredictedGender::Male;
    if (word == "die" || word == "eine") return PredictedGender::Female;
  }
  return std::nullopt;
}

namespace detail {

inline std::optional<std::size_t> find_sequence(const std::vector<std::string>& hay,
                                                const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Hard string matching of the lexicon forms of `profession` against the
// translation. Words are compared lowercased with edge punctuation removed;
// diacritics are significant.
inline ProfessionMatch match_profession(std::string_view translation, std::string_view profession,
                                        const GenderLexicon& lexicon) {
  const auto* entry = lexicon.find(profession);
  if (!entry) {
    throw DomainError("profession '" + std::string(profession) + "' is not in the " +
                      lexicon.language() + " lexicon");
  }
  const auto tw = normalized_words(translation);

  struct Hit {
    std::size_t start;
    std::size_t length;
    InflectedForm form;
  };
  std::vector<Hit> hits;
  auto probe = [&](const std::string& form_text, InflectedForm form) {
    const auto seq = normalized_words(form_text);
    if (auto pos = detail::find_sequence(tw, seq)) hits.push_back({*pos, seq.size(), form});
  };

  ProfessionMatch m;
  const bool epicene = entry->epicene();
  probe(entry->masculine, InflectedForm::Masculine);
  if (!epicene) probe(entry->feminine, InflectedForm::Feminine);
  if (entry->neutral) probe(*entry->neutral, InflectedForm::Neutral);
  if (hits.empty()) return m;

  // Earliest start wins; at equal start the longer span, then M < F < N.
  const auto best = *std::min_element(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.length != b.length) return a.length > b.length;
    return static_cast<int>(a.form) < static_cast<int>(b.form);
  });
  m.found = true;
  m.word_index = best.start + best.length - 1;

  if (best.form == InflectedForm::Neutral) {
    m.matched_form = InflectedForm::Neutral;
    m.ambiguous = true;
    return m;
  }

  if (epicene) {
    for (std::size_t back = 1; back <= 2 && back <= best.start; ++back) {
      if (auto g = determiner_gender(lexicon.language(), tw[best.start - back])) {
        m.predicted_gender = *g;
        m.matched_form = *g == PredictedGender::Male ? InflectedForm::Masculine
                                                     : InflectedForm::Feminine;
        return m;
      }
    }
    m.matched_form = InflectedForm::Neutral;
    m.ambiguous = true;
    return m;
  }

  const bool has_m = std::any_of(hits.begin(), hits.end(),
                                 [](const Hit& h) { return h.form == InflectedForm::Masculine; });
  const bool has_f = std::any_of(hits.begin(), hits.end(),
                                 [](const Hit& h) { return h.form == InflectedForm::Feminine; });
  m.ambiguous = has_m && has_f;
  m.matched_form = best.form;
  m.predicted_gender =
      best.form == InflectedForm::Masculine ? PredictedGender::Male : PredictedGender::Female;
  return m;
}

inline double match_rate(const std::vector<ProfessionMatch>& matches) {
  if (matches.empty()) throw DomainError("match_rate of an empty list");
  const auto found = std::count_if(matches.begin(), matches.end(),
                                   [](const ProfessionMatch& m) { return m.found; });
  return static_cast<double>(found) / static_cast<double>(matches.size());
}

}  // namespace mtbias
