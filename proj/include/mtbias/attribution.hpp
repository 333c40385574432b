#pragma once

// Raw token-level attribution tensors, their aggregation to word-level
// matrices, and extraction of the three diagnostic scores.
//
// Aggregation is A = g(f(A_r)): f reduces every (source word x target word)
// block of sub-token scores to its signed max-abs value per hidden unit, g
// takes the Euclidean norm over the hidden dimension.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mtbias/corpus.hpp"
#include "mtbias/error.hpp"
#include "mtbias/lexicon.hpp"

namespace mtbias {

struct AttributionTensor {
  std::string instance_id;
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  std::size_t hidden_size = 0;
  // Row-major: source token, then target token, then hidden unit.
  std::vector<float> scores;
  std::vector<std::size_t> source_word_map;
  std::vector<std::size_t> target_word_map;

  std::size_t source_len() const { return source_tokens.size(); }
  std::size_t target_len() const { return target_tokens.size(); }

  float at(std::size_t s, std::size_t t, std::size_t d) const {
    return scores[(s * target_len() + t) * hidden_size + d];
  }
  float& at(std::size_t s, std::size_t t, std::size_t d) {
    return scores[(s * target_len() + t) * hidden_size + d];
  }

  bool operator==(const AttributionTensor&) const = default;
};

namespace detail {

inline void validate_word_map(const std::vector<std::size_t>& map, std::size_t tokens,
                              const char* side) {
  if (map.size() != tokens) {
    throw ValidationError(std::string(side) + " word map has " + std::to_string(map.size()) +
                          " entries for " + std::to_string(tokens) + " tokens");
  }
  if (map.empty()) return;
  if (map.front() != 0) throw ValidationError(std::string(side) + " word map must start at 0");
  for (std::size_t i = 1; i < map.size(); ++i) {
    if (map[i] != map[i - 1] && map[i] != map[i - 1] + 1) {
      throw ValidationError(std::string(side) +
                            " word map must be non-decreasing without gaps at token " +
                            std::to_string(i));
    }
  }
}

// [begin, end) token ranges per word.
inline std::vector<std::pair<std::size_t, std::size_t>> word_spans(
    const std::vector<std::size_t>& map) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (spans.size() == map[i]) spans.emplace_back(i, i + 1);
    else spans.back().second = i + 1;
  }
  return spans;
}

}  // namespace detail

inline void validate(const AttributionTensor& t) {
  if (t.hidden_size == 0) throw ValidationError("hidden size must be positive");
  if (t.source_tokens.empty() || t.target_tokens.empty()) {
    throw ValidationError("attribution tensor needs at least one source and one target token");
  }
  const std::size_t expected = t.source_len() * t.target_len() * t.hidden_size;
  if (t.scores.size() != expected) {
    throw ValidationError("score array has " + std::to_string(t.scores.size()) +
                          " values, expected " + std::to_string(expected));
  }
  for (float v : t.scores) {
    if (!std::isfinite(v)) throw ValidationError("non-finite attribution score");
  }
  detail::validate_word_map(t.source_word_map, t.source_len(), "source");
  detail::validate_word_map(t.target_word_map, t.target_len(), "target");
}

struct WordAttributionMatrix {
  std::size_t source_words = 0;
  std::size_t target_words = 0;
  std::vector<double> values;  // row-major S x T

  double at(std::size_t i, std::size_t j) const { return values[i * target_words + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * target_words + j]; }

  bool operator==(const WordAttributionMatrix&) const = default;
};

// Value with the largest magnitude, sign preserved. On |a| == |b| the earlier
// element is kept.
template <typename Range>
auto signed_max_abs(const Range& values) {
  auto it = std::begin(values);
  auto best = *it;
  for (++it; it != std::end(values); ++it) {
    if (std::abs(*it) > std::abs(best)) best = *it;
  }
  return best;
}

inline WordAttributionMatrix aggregate(const AttributionTensor& tensor) {
  validate(tensor);
  const auto src = detail::word_spans(tensor.source_word_map);
  const auto tgt = detail::word_spans(tensor.target_word_map);
  const std::size_t h = tensor.hidden_size;

  WordAttributionMatrix out;
  out.source_words = src.size();
  out.target_words = tgt.size();
  out.values.assign(src.size() * tgt.size(), 0.0);

  std::vector<float> per_target;
  for (std::size_t i = 0; i < src.size(); ++i) {
    for (std::size_t j = 0; j < tgt.size(); ++j) {
      double sum_sq = 0.0;
      for (std::size_t d = 0; d < h; ++d) {
        // f over the source span first, then over the target span.
        per_target.clear();
        for (std::size_t t = tgt[j].first; t < tgt[j].second; ++t) {
          float best = tensor.at(src[i].first, t, d);
          for (std::size_t s = src[i].first + 1; s < src[i].second; ++s) {
            const float v = tensor.at(s, t, d);
            if (std::abs(v) > std::abs(best)) best = v;
          }
          per_target.push_back(best);
        }
        const double reduced = signed_max_abs(per_target);
        sum_sq += reduced * reduced;
      }
      out.at(i, j) = std::sqrt(sum_sq);
    }
  }
  return out;
}

struct AttributionTriple {
  double a_ctrl_prof = 0.0;
  double a_prof_prof = 0.0;
  double a_pron_prof = 0.0;
  std::size_t source_prof_index = 0;
  std::size_t source_pron_index = 0;
  std::size_t target_prof_index = 0;
  bool matched = true;

  bool operator==(const AttributionTriple&) const = default;
};

inline AttributionTriple extract_triple(const WordAttributionMatrix& matrix,
                                        const WinoMtInstance& instance,
                                        const ProfessionMatch& match) {
  if (!match.found || !match.word_index) {
    throw DomainError("instance " + instance.id + ": profession not matched in translation");
  }
  const auto span = find_word_span(instance.source_text, instance.target_profession);
  if (!span) {
    throw SourceAlignmentFailure("instance " + instance.id + ": profession '" +
                                 instance.target_profession + "' not found in source");
  }
  const std::size_t j = *match.word_index;
  if (span->second >= matrix.source_words || instance.pronoun_index >= matrix.source_words ||
      j >= matrix.target_words) {
    throw ValidationError("instance " + instance.id + ": word indices exceed the " +
                          std::to_string(matrix.source_words) + "x" +
                          std::to_string(matrix.target_words) + " attribution matrix");
  }
  AttributionTriple triple;
  triple.source_prof_index = span->second;
  triple.source_pron_index = instance.pronoun_index;
  triple.target_prof_index = j;
  triple.a_ctrl_prof = matrix.at(0, j);
  std::vector<double> column;
  for (std::size_t i = span->first; i <= span->second; ++i) column.push_back(matrix.at(i, j));
  triple.a_prof_prof = signed_max_abs(column);
  triple.a_pron_prof = matrix.at(instance.pronoun_index, j);
  return triple;
}

}  // namespace mtbias
