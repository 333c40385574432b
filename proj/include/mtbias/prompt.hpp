#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mtbias/error.hpp"

namespace mtbias {

enum class TemplateId { T1, T2, QA };

inline std::string_view to_string(TemplateId t) {
  switch (t) {
    case TemplateId::T1: return "T1";
    case TemplateId::T2: return "T2";
    case TemplateId::QA: return "QA";
  }
  return "?";
}

inline std::optional<TemplateId> parse_template_id(std::string_view s) {
  if (s == "T1") return TemplateId::T1;
  if (s == "T2") return TemplateId::T2;
  if (s == "QA") return TemplateId::QA;
  return std::nullopt;
}

inline constexpr std::string_view kTemplateT1 = "{src_text} Translate this to {tgt_lang}?";
inline constexpr std::string_view kTemplateT2 =
    "Translate from {src_lang} to {tgt_lang}:\n\n{src_text}\n\n{tgt_lang}:";

// Display names for the language codes the tooling knows about; anything
// else passes through unchanged.
inline std::string language_name(std::string_view code) {
  if (code == "en") return "English";
  if (code == "es") return "Spanish";
  if (code == "de") return "German";
  if (code == "fr") return "French";
  if (code == "it") return "Italian";
  return std::string(code);
}

inline std::string zero_shot_prompt(TemplateId id, std::string_view src_text,
                                    std::string_view src_lang, std::string_view tgt_lang) {
  std::string out;
  switch (id) {
    case TemplateId::T1:
      out.append(src_text).append(" Translate this to ").append(tgt_lang).append("?");
      return out;
    case TemplateId::T2:
      out.append("Translate from ").append(src_lang).append(" to ").append(tgt_lang);
      out.append(":\n\n").append(src_text).append("\n\n").append(tgt_lang).append(":");
      return out;
    case TemplateId::QA:
      break;
  }
  throw DomainError("the QA template needs an exemplar set; use build_fewshot_prompt");
}

// One Q/A exemplar block, three LFs after the answer.
inline std::string qa_exemplar(std::string_view src_text, std::string_view tgt_text,
                               std::string_view tgt_lang) {
  std::string out = "Q: Translate ";
  out.append(src_text).append(" to ").append(tgt_lang).append("?\n\nA: ");
  out.append(tgt_text).append("\n\n\n");
  return out;
}

// The open question that ends a few-shot prompt.
inline std::string qa_query(std::string_view src_text, std::string_view tgt_lang) {
  std::string out = "Q: Translate ";
  out.append(src_text).append(" to ").append(tgt_lang).append("?\n\nA:");
  return out;
}

}  // namespace mtbias
