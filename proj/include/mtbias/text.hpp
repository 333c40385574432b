#pragma once

// UTF-8 helpers shared by the corpus, lexicon and client modules.

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mtbias/error.hpp"

namespace mtbias {

namespace detail {

struct CodePoint {
  UChar32 value;
  std::size_t begin;
  std::size_t end;
};

// Decodes the code point starting at byte offset i. Malformed sequences
// decode to U+FFFD and consume one byte.
inline CodePoint decode_at(std::string_view s, std::size_t i) {
  auto offset = static_cast<int32_t>(i);
  const auto length = static_cast<int32_t>(s.size());
  UChar32 c = 0;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), offset, length, c);
  if (c < 0) c = 0xFFFD;
  return {c, i, static_cast<std::size_t>(offset)};
}

inline void append_utf8(std::string& out, UChar32 c) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, c, error);
  if (error) {
    out += "\xEF\xBF\xBD";
    return;
  }
  out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
}

}  // namespace detail

inline bool is_unicode_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

// Splits on runs of Unicode whitespace. Punctuation stays attached.
inline std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  std::size_t start = std::string_view::npos;
  while (i < text.size()) {
    const auto cp = detail::decode_at(text, i);
    if (is_unicode_space(cp.value)) {
      if (start != std::string_view::npos) {
        out.emplace_back(text.substr(start, cp.begin - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = cp.begin;
    }
    i = cp.end;
  }
  if (start != std::string_view::npos) out.emplace_back(text.substr(start));
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto cp = detail::decode_at(s, i);
    detail::append_utf8(out, u_tolower(cp.value));
    i = cp.end;
  }
  return out;
}

// Lowercases and strips leading/trailing code points that are neither
// letters nor digits. "She," -> "she", "¿Quién?" -> "quién".
inline std::string normalize_word(std::string_view word) {
  std::vector<detail::CodePoint> cps;
  for (std::size_t i = 0; i < word.size();) {
    cps.push_back(detail::decode_at(word, i));
    i = cps.back().end;
  }
  std::size_t first = 0;
  std::size_t last = cps.size();
  while (first < last && !u_isalnum(cps[first].value)) ++first;
  while (last > first && !u_isalnum(cps[last - 1].value)) --last;
  if (first == last) return {};
  return to_lower(word.substr(cps[first].begin, cps[last - 1].end - cps[first].begin));
}

inline std::vector<std::string> normalized_words(std::string_view text) {
  auto ws = words(text);
  for (auto& w : ws) w = normalize_word(w);
  return ws;
}

inline std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// LF-separated lines; a trailing LF does not produce an empty last line and a
// trailing CR on each line is dropped.
inline std::vector<std::string> split_lines(std::string_view bytes) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < bytes.size()) {
    auto nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) nl = bytes.size();
    auto line = bytes.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace mtbias
