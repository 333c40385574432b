#pragma once

// `.attr` exchange files: one JSON header line terminated by LF, then
// S_r*T_r*h little-endian float32 values (source-major, then target, then
// hidden).

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mtbias/attribution.hpp"
#include "mtbias/error.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

inline constexpr int kAttrVersion = 1;

// Header keys beyond the required ones (e.g. the extractor's scalar choice)
// are kept in `extra` and written back unchanged.
struct AttrFile {
  AttributionTensor tensor;
  nlohmann::json extra = nlohmann::json::object();
};

inline std::string encode_attr(const AttributionTensor& tensor,
                               const nlohmann::json& extra = nlohmann::json::object()) {
  try {
    validate(tensor);
  } catch (const ValidationError& e) {
    throw FormatError(std::string("cannot encode tensor: ") + e.what());
  }
  nlohmann::json header = extra.is_object() ? extra : nlohmann::json::object();
  header["version"] = kAttrVersion;
  header["instance_id"] = tensor.instance_id;
  header["source_tokens"] = tensor.source_tokens;
  header["target_tokens"] = tensor.target_tokens;
  header["hidden_size"] = tensor.hidden_size;
  header["source_word_map"] = tensor.source_word_map;
  header["target_word_map"] = tensor.target_word_map;

  std::string out = header.dump();
  out += '\n';
  const std::size_t header_len = out.size();
  out.resize(header_len + tensor.scores.size() * 4);
  char* p = out.data() + header_len;
  for (float v : tensor.scores) {
    auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) *p++ = static_cast<char>((bits >> (8 * b)) & 0xFFu);
  }
  return out;
}

inline AttrFile decode_attr(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw FormatError("missing header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, nl));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("header is not JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("version")) {
    throw FormatError("header lacks a version field");
  }
  if (header["version"] != kAttrVersion) {
    throw FormatError("unsupported .attr version " + header["version"].dump());
  }

  AttrFile file;
  auto& t = file.tensor;
  try {
    t.instance_id = header.at("instance_id").get<std::string>();
    t.source_tokens = header.at("source_tokens").get<std::vector<std::string>>();
    t.target_tokens = header.at("target_tokens").get<std::vector<std::string>>();
    const auto h = header.at("hidden_size").get<std::int64_t>();
    if (h <= 0) throw FormatError("hidden_size must be positive");
    t.hidden_size = static_cast<std::size_t>(h);
    t.source_word_map = header.at("source_word_map").get<std::vector<std::size_t>>();
    t.target_word_map = header.at("target_word_map").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad header field: ") + e.what());
  }

  const std::size_t count = t.source_len() * t.target_len() * t.hidden_size;
  const auto payload = bytes.substr(nl + 1);
  if (payload.size() != count * 4) {
    throw FormatError("payload has " + std::to_string(payload.size()) + " bytes, expected " +
                      std::to_string(count * 4));
  }
  t.scores.resize(count);
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  for (std::size_t i = 0; i < count; ++i, p += 4) {
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                               (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    t.scores[i] = std::bit_cast<float>(bits);
  }
  try {
    validate(t);
  } catch (const ValidationError& e) {
    throw FormatError(e.what());
  }

  for (const char* key : {"version", "instance_id", "source_tokens", "target_tokens",
                          "hidden_size", "source_word_map", "target_word_map"}) {
    header.erase(key);
  }
  file.extra = std::move(header);
  return file;
}

inline void write_tensor(const AttributionTensor& tensor, const std::filesystem::path& path,
                         const nlohmann::json& extra = nlohmann::json::object()) {
  write_file(path, encode_attr(tensor, extra));
}

inline AttributionTensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_attr(read_file(path)).tensor;
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace mtbias
