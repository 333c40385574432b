#pragma once

// Paired bootstrap significance test between two systems evaluated on the
// same instances.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "mtbias/error.hpp"
#include "mtbias/metrics.hpp"
#include "mtbias/rng.hpp"

namespace mtbias {

enum class BootstrapMetric { Accuracy, MacroF1 };

struct BootstrapConfig {
  std::size_t resamples = 1000;
  double sample_fraction = 0.30;
  std::uint64_t seed = 20230601;
  BootstrapMetric metric = BootstrapMetric::Accuracy;
  // Worker threads. Results do not depend on this value.
  std::size_t threads = 1;
};

struct BootstrapResult {
  double p_value = 1.0;
  std::size_t wins_for_b = 0;  // resamples where metric_A <= metric_B
  std::size_t total_draws = 0;
};

// Resample r uses Rng(derive_seed(seed, r)) and keeps drawing multisets of
// ceil(fraction * |ids|) ids with replacement until the metric is defined on
// both systems. p = #(metric_A <= metric_B) / n, one-sided for "A better".
inline BootstrapResult bootstrap_compare(const std::vector<EvaluationRecord>& records_a,
                                         const std::vector<EvaluationRecord>& records_b,
                                         const BootstrapConfig& config = {}) {
  if (config.resamples == 0) throw DomainError("bootstrap needs at least one resample");
  if (!(config.sample_fraction > 0.0 && config.sample_fraction <= 1.0)) {
    throw DomainError("sample fraction must lie in (0, 1]");
  }
  const auto a_bin = binary_records(records_a);
  const auto b_bin = binary_records(records_b);
  if (a_bin.empty()) throw DomainError("bootstrap over an empty record set");

  // Pair records by id in A's order.
  std::map<std::string, std::size_t> b_index;
  for (std::size_t i = 0; i < b_bin.size(); ++i) b_index.emplace(b_bin[i].instance_id, i);
  if (b_index.size() != b_bin.size() || a_bin.size() != b_bin.size()) {
    throw DomainError("records A and B cover different instance sets");
  }
  std::vector<std::size_t> pair_b(a_bin.size());
  for (std::size_t i = 0; i < a_bin.size(); ++i) {
    auto it = b_index.find(a_bin[i].instance_id);
    if (it == b_index.end()) {
      throw DomainError("instance " + a_bin[i].instance_id + " missing from records B");
    }
    pair_b[i] = it->second;
  }

  const std::size_t ids = a_bin.size();
  const double target = config.sample_fraction * static_cast<double>(ids);
  const auto sample_size = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(target - 1e-9 * target)));
  const std::size_t draw_cap = 10 * config.resamples;

  auto metric = [&](const std::vector<EvaluationRecord>& rs) {
    return config.metric == BootstrapMetric::Accuracy ? accuracy(rs) : macro_f1(rs);
  };
  auto defined = [&](const std::vector<EvaluationRecord>& rs) {
    if (config.metric == BootstrapMetric::Accuracy) return true;
    bool m = false, f = false;
    for (const auto& r : rs) {
      m = m || r.gold_gender == Gender::Male;
      f = f || r.gold_gender == Gender::Female;
    }
    return m && f;
  };

  std::vector<char> a_le_b(config.resamples, 0);
  std::vector<std::size_t> draws(config.resamples, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> used{0};

  auto worker = [&] {
    std::vector<EvaluationRecord> sa, sb;
    for (std::size_t r; (r = next.fetch_add(1)) < config.resamples;) {
      Rng rng(derive_seed(config.seed, r));
      while (true) {
        if (used.fetch_add(1) >= draw_cap) return;
        ++draws[r];
        sa.clear();
        sb.clear();
        for (std::size_t k = 0; k < sample_size; ++k) {
          const auto i = static_cast<std::size_t>(rng.below(ids));
          sa.push_back(a_bin[i]);
          sb.push_back(b_bin[pair_b[i]]);
        }
        if (defined(sa)) {
          a_le_b[r] = metric(sa) <= metric(sb) ? 1 : 0;
          break;
        }
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (used.load() > draw_cap) {
    throw DomainError("metric undefined on too many resamples (cap of " +
                      std::to_string(draw_cap) + " draws reached)");
  }

  BootstrapResult result;
  for (std::size_t r = 0; r < config.resamples; ++r) {
    result.wins_for_b += a_le_b[r] ? 1 : 0;
    result.total_draws += draws[r];
  }
  result.p_value = static_cast<double>(result.wins_for_b) / static_cast<double>(config.resamples);
  return result;
}

}  // namespace mtbias
