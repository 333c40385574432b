#pragma once

// Translation acquisition: backends (offline file, deterministic mocks, and
// the HTTP service in http_backend.hpp), a digest-keyed response cache, and
// the batch driver.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtbias/corpus.hpp"
#include "mtbias/digest.hpp"
#include "mtbias/error.hpp"
#include "mtbias/lexicon.hpp"
#include "mtbias/prompt.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

enum class DecodingStrategy { Greedy, Beam, TopK, TopP, Contrastive };

inline std::string_view to_string(DecodingStrategy s) {
  switch (s) {
    case DecodingStrategy::Greedy: return "greedy";
    case DecodingStrategy::Beam: return "beam";
    case DecodingStrategy::TopK: return "top_k";
    case DecodingStrategy::TopP: return "top_p";
    case DecodingStrategy::Contrastive: return "contrastive";
  }
  return "?";
}

inline std::optional<DecodingStrategy> parse_strategy(std::string_view s) {
  if (s == "greedy") return DecodingStrategy::Greedy;
  if (s == "beam") return DecodingStrategy::Beam;
  if (s == "top_k") return DecodingStrategy::TopK;
  if (s == "top_p") return DecodingStrategy::TopP;
  if (s == "contrastive") return DecodingStrategy::Contrastive;
  return std::nullopt;
}

// Defaults: beam search, 4 beams, no sampling.
struct DecodingConfig {
  DecodingStrategy strategy = DecodingStrategy::Beam;
  int num_beams = 4;
  std::optional<int> top_k;
  std::optional<double> top_p;
  std::optional<double> temperature;
  std::optional<double> penalty_alpha;
  int max_tokens = 256;

  void validate() const {
    auto need = [&](bool ok, const char* field) {
      if (!ok) {
        throw DomainError(std::string("decoding strategy ") + std::string(to_string(strategy)) +
                          " requires " + field);
      }
    };
    if (max_tokens <= 0) throw DomainError("max_tokens must be positive");
    switch (strategy) {
      case DecodingStrategy::Greedy: break;
      case DecodingStrategy::Beam: need(num_beams >= 1, "num_beams >= 1"); break;
      case DecodingStrategy::TopK: need(top_k && *top_k >= 1, "top_k"); break;
      case DecodingStrategy::TopP:
        need(top_p && *top_p > 0.0 && *top_p <= 1.0, "top_p in (0, 1]");
        break;
      case DecodingStrategy::Contrastive:
        need(top_k && *top_k >= 1, "top_k");
        need(penalty_alpha.has_value(), "penalty_alpha");
        break;
    }
  }

  // Only the fields relevant to the strategy, in a fixed key order.
  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    j["strategy"] = std::string(to_string(strategy));
    if (strategy == DecodingStrategy::Beam) j["num_beams"] = num_beams;
    if (top_k) j["top_k"] = *top_k;
    if (top_p) j["top_p"] = *top_p;
    if (temperature) j["temperature"] = *temperature;
    if (penalty_alpha) j["penalty_alpha"] = *penalty_alpha;
    j["max_tokens"] = max_tokens;
    return j;
  }
};

// SHA-256 of the prompt bytes, a NUL separator, and the decoding config JSON.
inline std::string request_digest(std::string_view prompt, const DecodingConfig& decoding) {
  std::string payload(prompt);
  payload += '\0';
  payload += decoding.to_json().dump();
  return sha256_hex(payload);
}

struct TranslationRequest {
  std::string instance_id;
  std::string prompt;
  // Set when the prompt was built from a corpus instance (needed by mocks).
  const WinoMtInstance* instance = nullptr;
};

struct TranslationRecord {
  std::string instance_id;
  std::string digest;
  std::string output;
  std::string backend;
  nlohmann::json decoding;
  std::optional<std::string> error;
  std::optional<std::string> warning;
};

// Failure worth retrying (connection refused, timeout, 5xx...).
class TransientBackendError : public BackendError {
 public:
  using BackendError::BackendError;
};

class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  virtual std::string tag() const = 0;
  // Whether responses go through the digest cache.
  virtual bool cacheable() const { return false; }
  // Throws BackendError before any work if the batch cannot be served.
  virtual void check(const std::vector<TranslationRequest>&) const {}
  virtual std::string translate(const TranslationRequest& request,
                                const DecodingConfig& decoding) = 0;
};

// instance_id <TAB> translation
inline std::map<std::string, std::string> parse_translations_tsv(std::string_view bytes) {
  std::map<std::string, std::string> out;
  const auto lines = split_lines(bytes);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto tab = lines[n].find('\t');
    if (tab == std::string::npos) throw ParseError(n + 1, "expected instance_id<TAB>translation");
    auto id = lines[n].substr(0, tab);
    if (!out.emplace(id, lines[n].substr(tab + 1)).second) {
      throw ValidationError("line " + std::to_string(n + 1) + ": duplicate id '" + id + "'");
    }
  }
  return out;
}

inline std::map<std::string, std::string> load_translations(const std::filesystem::path& path) {
  return parse_translations_tsv(read_file(path));
}

// Tabs and line breaks inside a translation become spaces so each record
// stays on one line.
inline std::string serialize_translations(const std::vector<TranslationRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    std::string text = r.output;
    std::replace_if(text.begin(), text.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    out += r.instance_id;
    out += '\t';
    out += text;
    out += '\n';
  }
  return out;
}

class OfflineBackend : public TranslationBackend {
 public:
  explicit OfflineBackend(std::map<std::string, std::string> translations)
      : translations_(std::move(translations)) {}

  std::string tag() const override { return "offline"; }

  void check(const std::vector<TranslationRequest>& requests) const override {
    std::string missing;
    for (const auto& r : requests) {
      if (!translations_.count(r.instance_id)) missing += " " + r.instance_id;
    }
    if (!missing.empty()) throw BackendError("offline translations lack ids:" + missing);
  }

  std::string translate(const TranslationRequest& request, const DecodingConfig&) override {
    auto it = translations_.find(request.instance_id);
    if (it == translations_.end()) {
      throw BackendError("offline translations lack id " + request.instance_id);
    }
    return it->second;
  }

 private:
  std::map<std::string, std::string> translations_;
};

enum class MockRule { StereotypeFollower, PronounFollower };

inline std::optional<MockRule> parse_mock_rule(std::string_view s) {
  if (s == "stereotype-follower") return MockRule::StereotypeFollower;
  if (s == "pronoun-follower") return MockRule::PronounFollower;
  return std::nullopt;
}

// Renders "<Det> <form> ..." with the lexicon form of the target profession.
//
//   stereotype-follower: pro -> gold gender, anti -> opposite gender,
//                        untagged -> masculine
//   pronoun-follower:    gold gender; neutral referents get the neutral form
//                        when the lexicon has one, else the bare masculine
class MockBackend : public TranslationBackend {
 public:
  MockBackend(MockRule rule, GenderLexicon lexicon) : rule_(rule), lexicon_(std::move(lexicon)) {}

  std::string tag() const override {
    return rule_ == MockRule::StereotypeFollower ? "mock:stereotype-follower"
                                                 : "mock:pronoun-follower";
  }

  void check(const std::vector<TranslationRequest>& requests) const override {
    for (const auto& r : requests) {
      if (!r.instance) throw BackendError("mock backend needs corpus instances, got a bare prompt");
      if (!lexicon_.find(r.instance->target_profession)) {
        throw BackendError("mock backend: profession '" + r.instance->target_profession +
                           "' missing from lexicon");
      }
    }
  }

  std::string translate(const TranslationRequest& request, const DecodingConfig&) override {
    const auto& inst = *request.instance;
    const auto& entry = *lexicon_.find(inst.target_profession);
    std::optional<Gender> g;
    if (rule_ == MockRule::PronounFollower) {
      if (inst.gold_gender != Gender::Neutral) g = inst.gold_gender;
    } else if (inst.stereotype == Stereotype::Pro) {
      g = inst.gold_gender;
    } else if (inst.stereotype == Stereotype::Anti) {
      g = inst.gold_gender == Gender::Male ? Gender::Female : Gender::Male;
    } else {
      g = Gender::Male;
    }
    if (!g) return (entry.neutral ? *entry.neutral : entry.masculine) + " ...";
    const bool male = *g == Gender::Male;
    std::string det = determiner(male);
    return (det.empty() ? "" : det + " ") + (male ? entry.masculine : entry.feminine) + " ...";
  }

 private:
  std::string determiner(bool male) const {
    if (lexicon_.language() == "es") return male ? "El" : "La";
    if (lexicon_.language() == "de") return male ? "Der" : "Die";
    return {};
  }

  MockRule rule_;
  GenderLexicon lexicon_;
};

// Append-only cache file, one `digest<TAB>json-string` line per response.
class TranslationCache {
 public:
  TranslationCache() = default;
  explicit TranslationCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(*path_)) return;
    const auto lines = split_lines(read_file(*path_));
    for (std::size_t n = 0; n < lines.size(); ++n) {
      if (lines[n].empty()) continue;
      const auto tab = lines[n].find('\t');
      if (tab == std::string::npos) throw ParseError(n + 1, "malformed cache line");
      try {
        entries_[lines[n].substr(0, tab)] =
            nlohmann::json::parse(lines[n].substr(tab + 1)).get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(n + 1, std::string("malformed cache entry: ") + e.what());
      }
    }
  }

  std::optional<std::string> get(const std::string& digest) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& digest, const std::string& output) {
    std::lock_guard lock(mutex_);
    if (!entries_.emplace(digest, output).second) return;
    if (!path_) return;
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to cache " + path_->string());
    out << digest << '\t' << nlohmann::json(output).dump() << '\n';
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

 private:
  std::optional<std::filesystem::path> path_;
  std::map<std::string, std::string> entries_;
  mutable std::mutex mutex_;
};

struct BatchOptions {
  std::size_t max_in_flight = 4;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  TranslationCache* cache = nullptr;
  std::ostream* warnings = &std::clog;
};

// One record per request, in request order. Identical (prompt, decoding)
// pairs are sent at most once per batch and never again while cached.
inline std::vector<TranslationRecord> translate_batch(const std::vector<TranslationRequest>& requests,
                                                      const DecodingConfig& decoding,
                                                      TranslationBackend& backend,
                                                      const BatchOptions& options = {}) {
  decoding.validate();
  backend.check(requests);

  std::vector<TranslationRecord> records(requests.size());
  const auto config_json = decoding.to_json();
  for (std::size_t i = 0; i < requests.size(); ++i) {
    records[i].instance_id = requests[i].instance_id;
    records[i].digest = request_digest(requests[i].prompt, decoding);
    records[i].backend = backend.tag();
    records[i].decoding = config_json;
  }

  // Unique work: the first request carrying each digest, unless cached.
  const bool use_cache = backend.cacheable() && options.cache != nullptr;
  std::vector<std::size_t> work;
  std::map<std::string, std::size_t> first_by_digest;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (!backend.cacheable()) {
      work.push_back(i);
      continue;
    }
    if (first_by_digest.emplace(records[i].digest, i).second) {
      if (!(use_cache && options.cache->get(records[i].digest))) work.push_back(i);
    }
  }

  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t w; (w = next.fetch_add(1)) < work.size();) {
      const std::size_t i = work[w];
      auto backoff = options.initial_backoff;
      for (int attempt = 0;; ++attempt) {
        try {
          records[i].output = backend.translate(requests[i], decoding);
          if (use_cache) options.cache->put(records[i].digest, records[i].output);
          break;
        } catch (const TransientBackendError& e) {
          if (attempt >= options.max_retries) {
            records[i].error = std::string("retries exhausted: ") + e.what();
            break;
          }
          std::this_thread::sleep_for(backoff);
          backoff *= 2;
        } catch (const BackendError& e) {
          records[i].error = e.what();
          break;
        }
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.max_in_flight, 1, std::max<std::size_t>(1, work.size()));
  if (threads == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto& r = records[i];
    if (backend.cacheable()) {
      const std::size_t src = first_by_digest.at(r.digest);
      if (src != i) {
        r.output = records[src].output;
        r.error = records[src].error;
      } else if (use_cache && std::find(work.begin(), work.end(), i) == work.end()) {
        r.output = *options.cache->get(r.digest);
      }
    }
    if (!r.error && r.output.empty()) {
      r.warning = "empty model output";
      if (options.warnings) {
        *options.warnings << "warning: empty output for " << r.instance_id << '\n';
      }
    }
  }
  return records;
}

// Zero-shot requests for every corpus instance.
inline std::vector<TranslationRequest> zero_shot_requests(const Corpus& corpus, TemplateId id,
                                                          std::string_view src_lang,
                                                          std::string_view tgt_lang) {
  std::vector<TranslationRequest> out;
  for (const auto& inst : corpus.instances()) {
    out.push_back({inst.id, zero_shot_prompt(id, inst.source_text, src_lang, tgt_lang), &inst});
  }
  return out;
}

}  // namespace mtbias
