#pragma once

// Interpretability-guided few-shot exemplar selection.
//
// Candidates are the instances whose pronoun attribution toward the
// translated profession is lowest within each (stereotype x gender)
// stratum. A seeded draw picks the exemplars, human translations are
// attached under a non-target-profession policy, and the result is rendered
// as a Q/A few-shot prompt.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtbias/corpus.hpp"
#include "mtbias/error.hpp"
#include "mtbias/metrics.hpp"
#include "mtbias/prompt.hpp"
#include "mtbias/rng.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

inline constexpr double kDefaultPoolFraction = 0.25;
inline constexpr std::uint64_t kDefaultSelectionSeed = 20230601;

struct Stratum {
  Stereotype stereotype;
  Gender gender;

  bool operator==(const Stratum&) const = default;
};

// Fixed stratum order used for pools, draws and output.
inline constexpr std::array<Stratum, 4> kStrata = {{
    {Stereotype::Pro, Gender::Female},
    {Stereotype::Pro, Gender::Male},
    {Stereotype::Anti, Gender::Female},
    {Stereotype::Anti, Gender::Male},
}};

inline std::string stratum_name(const Stratum& s) {
  return std::string(s.stereotype == Stereotype::Pro ? "Pro" : "Anti") + "-" +
         (s.gender == Gender::Female ? "F" : "M");
}

struct PoolCandidate {
  std::string instance_id;
  double a_pron_prof = 0.0;
};

using StratifiedPools = std::array<std::vector<PoolCandidate>, 4>;

// Keeps the ceil(q * |stratum|) lowest-a_pron,prof records of each stratum
// (ties by instance id), at least one.
inline StratifiedPools build_pool(const std::vector<EvaluationRecord>& records, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw DomainError("pool fraction must lie in (0, 1]");
  StratifiedPools pools;
  for (std::size_t k = 0; k < kStrata.size(); ++k) {
    auto& pool = pools[k];
    for (const auto& r : records) {
      if (r.triple && r.stereotype == kStrata[k].stereotype && r.gold_gender == kStrata[k].gender) {
        pool.push_back({r.instance_id, r.triple->a_pron_prof});
      }
    }
    if (pool.empty()) {
      throw DomainError("stratum " + stratum_name(kStrata[k]) + " has no matched records");
    }
    std::sort(pool.begin(), pool.end(), [](const PoolCandidate& a, const PoolCandidate& b) {
      if (a.a_pron_prof != b.a_pron_prof) return a.a_pron_prof < b.a_pron_prof;
      return a.instance_id < b.instance_id;
    });
    // The relative slack absorbs products like 0.1 * 30 = 3.0000000000000004.
    const double target = q * static_cast<double>(pool.size());
    auto keep = static_cast<std::size_t>(std::ceil(target - 1e-9 * target));
    keep = std::clamp<std::size_t>(keep, 1, pool.size());
    pool.resize(keep);
  }
  return pools;
}

enum class NtPolicy { NTFemale, NTMale, NTRandom };

inline std::string_view to_string(NtPolicy p) {
  switch (p) {
    case NtPolicy::NTFemale: return "NT-Female";
    case NtPolicy::NTMale: return "NT-Male";
    case NtPolicy::NTRandom: return "NT-Random";
  }
  return "?";
}

inline std::optional<NtPolicy> parse_nt_policy(std::string_view s) {
  if (s == "NT-Female" || s == "female") return NtPolicy::NTFemale;
  if (s == "NT-Male" || s == "male") return NtPolicy::NTMale;
  if (s == "NT-Random" || s == "random") return NtPolicy::NTRandom;
  return std::nullopt;
}

struct HumanTranslation {
  std::string nt_female;
  std::string nt_male;
};

struct Exemplar {
  std::string instance_id;
  std::string source_text;
  Stratum stratum{Stereotype::Pro, Gender::Female};
  double a_pron_prof = 0.0;
  std::optional<HumanTranslation> human_translations;
  // Translation used in the prompt after the NT policy is applied.
  std::optional<std::string> target_text;
};

struct ExemplarSet {
  std::size_t n = 4;
  std::vector<Exemplar> exemplars;
  NtPolicy nt_policy = NtPolicy::NTFemale;
  std::uint64_t rng_seed = kDefaultSelectionSeed;
};

struct SelectionConfig {
  std::size_t n = 4;
  std::uint64_t seed = kDefaultSelectionSeed;
  // Exemplars per stratum; when absent, n is split evenly across the four.
  std::optional<std::array<std::size_t, 4>> allocation;
};

// Draw protocol: one Rng seeded with `seed`; strata in kStrata order; within
// a stratum, a partial Fisher-Yates shuffle where draw k swaps position k with
// k + below(pool_size - k).
inline ExemplarSet select_exemplars(const StratifiedPools& pools, const Corpus& corpus,
                                    const SelectionConfig& config = {}) {
  std::array<std::size_t, 4> per_stratum{};
  if (config.allocation) {
    per_stratum = *config.allocation;
  } else {
    if (config.n == 0 || config.n % kStrata.size() != 0) {
      throw DomainError("exemplar count " + std::to_string(config.n) +
                        " is not divisible by the 4 strata");
    }
    per_stratum.fill(config.n / kStrata.size());
  }

  ExemplarSet set;
  set.rng_seed = config.seed;
  set.n = 0;
  Rng rng(config.seed);
  for (std::size_t k = 0; k < kStrata.size(); ++k) {
    auto pool = pools[k];
    const std::size_t want = per_stratum[k];
    if (pool.size() < want) {
      throw DomainError("pool for " + stratum_name(kStrata[k]) + " has " +
                        std::to_string(pool.size()) + " candidates, need " + std::to_string(want));
    }
    for (std::size_t d = 0; d < want; ++d) {
      const auto j = d + static_cast<std::size_t>(rng.below(pool.size() - d));
      std::swap(pool[d], pool[j]);
      Exemplar ex;
      ex.instance_id = pool[d].instance_id;
      ex.source_text = corpus.at(ex.instance_id).source_text;
      ex.stratum = kStrata[k];
      ex.a_pron_prof = pool[d].a_pron_prof;
      set.exemplars.push_back(std::move(ex));
    }
    set.n += want;
  }
  return set;
}

// TSV: instance_id <TAB> nt_female <TAB> nt_male
inline std::map<std::string, HumanTranslation> parse_human_translations(std::string_view bytes) {
  std::map<std::string, HumanTranslation> out;
  const auto lines = split_lines(bytes);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto f = split_tabs(lines[n]);
    if (f.size() != 3) {
      throw ParseError(n + 1, "expected instance_id, nt_female and nt_male columns");
    }
    if (!out.emplace(f[0], HumanTranslation{f[1], f[2]}).second) {
      throw ValidationError("line " + std::to_string(n + 1) + ": duplicate id '" + f[0] + "'");
    }
  }
  return out;
}

inline std::map<std::string, HumanTranslation> load_human_translations(
    const std::filesystem::path& path) {
  return parse_human_translations(read_file(path));
}

// NTRandom draws one coin per exemplar, in exemplar order, from an Rng seeded
// with derive_seed(set.rng_seed, 1); heads selects nt_female.
inline ExemplarSet resolve_translations(ExemplarSet set,
                                        const std::map<std::string, HumanTranslation>& human,
                                        NtPolicy policy) {
  std::vector<std::string> gaps;
  for (const auto& ex : set.exemplars) {
    auto it = human.find(ex.instance_id);
    if (it == human.end()) gaps.push_back(ex.instance_id + " (missing)");
    else if (it->second.nt_female.empty()) gaps.push_back(ex.instance_id + " (nt_female empty)");
    else if (it->second.nt_male.empty()) gaps.push_back(ex.instance_id + " (nt_male empty)");
  }
  if (!gaps.empty()) {
    std::string msg = "human translations incomplete:";
    for (const auto& g : gaps) msg += " " + g;
    throw ValidationError(msg);
  }
  set.nt_policy = policy;
  Rng rng(derive_seed(set.rng_seed, 1));
  for (auto& ex : set.exemplars) {
    const auto& ht = human.at(ex.instance_id);
    ex.human_translations = ht;
    bool female = policy == NtPolicy::NTFemale;
    if (policy == NtPolicy::NTRandom) female = rng.coin();
    ex.target_text = female ? ht.nt_female : ht.nt_male;
  }
  return set;
}

// Prefix shared by every few-shot prompt of a set.
inline std::string fewshot_prefix(const ExemplarSet& set, std::string_view target_language) {
  std::string out;
  for (const auto& ex : set.exemplars) {
    if (!ex.target_text) {
      throw DomainError("exemplar " + ex.instance_id + " has no resolved translation");
    }
    out += qa_exemplar(ex.source_text, *ex.target_text, target_language);
  }
  return out;
}

// With no exemplars the zero-shot T1 prompt is returned and a warning logged.
inline std::string build_fewshot_prompt(const ExemplarSet& set, std::string_view query_source,
                                        std::string_view target_language,
                                        std::ostream* warnings = &std::clog) {
  if (set.exemplars.empty()) {
    if (warnings) *warnings << "warning: empty exemplar set, using the zero-shot template\n";
    return zero_shot_prompt(TemplateId::T1, query_source, "English", target_language);
  }
  return fewshot_prefix(set, target_language) + qa_query(query_source, target_language);
}

}  // namespace mtbias
