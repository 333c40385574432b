// mtbias: command-line front end for the gender-bias evaluation pipeline.
//
// Stages communicate through files:
//
//   translate -> translations.tsv
//   attribute -> attributions.jsonl      (word-level matrices per instance)
//   match     -> matches.jsonl
//   evaluate  -> records.jsonl           (consumed by every later stage)
//   disaggregate, select-exemplars, build-prompts, compare, gnt, report

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtbias/http_backend.hpp"
#include "mtbias/mtbias.hpp"

namespace fs = std::filesystem;
using namespace mtbias;

namespace {

class MissingInput : public Error {
 public:
  MissingInput(const fs::path& path, const std::string& producer)
      : Error("missing-input", path.string() + " does not exist" +
                                   (producer.empty() ? std::string()
                                                     : "; produce it with `mtbias " + producer + "`")) {}
};

void require(const fs::path& path, const std::string& producer = {}) {
  if (!fs::exists(path)) throw MissingInput(path, producer);
}

struct Common {
  std::string src_lang = "en";
  std::string tgt_lang = "es";
};

Corpus load_corpus(const fs::path& path, const Common& c, bool allow_untagged) {
  require(path);
  ParseOptions opts;
  opts.require_stereotype = !allow_untagged;
  return parse_corpus(path, opts, {c.src_lang, c.tgt_lang});
}

struct MatrixLine {
  std::string instance_id;
  WordAttributionMatrix matrix;
};

void to_json(nlohmann::json& j, const MatrixLine& m) {
  j = nlohmann::json{{"instance_id", m.instance_id}, {"matrix", m.matrix}};
}
void from_json(const nlohmann::json& j, MatrixLine& m) {
  m.instance_id = j.at("instance_id").get<std::string>();
  m.matrix = j.at("matrix").get<WordAttributionMatrix>();
}

struct MatchLine {
  std::string instance_id;
  ProfessionMatch match;
};

void to_json(nlohmann::json& j, const MatchLine& m) {
  j = nlohmann::json{{"instance_id", m.instance_id}, {"match", m.match}};
}
void from_json(const nlohmann::json& j, MatchLine& m) {
  m.instance_id = j.at("instance_id").get<std::string>();
  m.match = j.at("match").get<ProfessionMatch>();
}

struct PromptLine {
  std::string instance_id;
  std::string prompt;
};

void to_json(nlohmann::json& j, const PromptLine& p) {
  j = nlohmann::json{{"instance_id", p.instance_id}, {"prompt", p.prompt}};
}
void from_json(const nlohmann::json& j, PromptLine& p) {
  p.instance_id = j.at("instance_id").get<std::string>();
  p.prompt = j.at("prompt").get<std::string>();
}

// ---------------------------------------------------------------- translate

struct TranslateArgs {
  std::string corpus, lexicon, offline, prompts, cache, out, records_out, endpoint;
  std::string backend = "mock:pronoun-follower";
  std::string template_id = "T1";
  std::string strategy = "beam";
  int num_beams = 4;
  std::optional<int> top_k;
  std::optional<double> top_p, temperature, penalty_alpha;
  int max_tokens = 256;
  std::size_t max_in_flight = 4;
  int retries = 3;
  int backoff_ms = 200;
  bool allow_untagged = false;
};

int run_translate(const TranslateArgs& a, const Common& c) {
  const auto corpus = load_corpus(a.corpus, c, a.allow_untagged);
  DecodingConfig dec;
  const auto strategy = parse_strategy(a.strategy);
  if (!strategy) throw DomainError("unknown decoding strategy '" + a.strategy + "'");
  dec.strategy = *strategy;
  dec.num_beams = a.num_beams;
  dec.top_k = a.top_k;
  dec.top_p = a.top_p;
  dec.temperature = a.temperature;
  dec.penalty_alpha = a.penalty_alpha;
  dec.max_tokens = a.max_tokens;

  const auto tid = parse_template_id(a.template_id);
  if (!tid) throw DomainError("unknown template '" + a.template_id + "'");
  std::vector<TranslationRequest> requests;
  if (*tid == TemplateId::QA) {
    if (a.prompts.empty()) throw DomainError("template QA needs --prompts from build-prompts");
    require(a.prompts, "build-prompts");
    for (auto& p : from_jsonl<PromptLine>(read_file(a.prompts))) {
      requests.push_back({p.instance_id, std::move(p.prompt), corpus.find(p.instance_id)});
    }
  } else {
    requests = zero_shot_requests(corpus, *tid, language_name(c.src_lang), language_name(c.tgt_lang));
  }

  std::unique_ptr<TranslationBackend> backend;
  if (a.backend.rfind("mock:", 0) == 0) {
    const auto rule = parse_mock_rule(a.backend.substr(5));
    if (!rule) throw DomainError("unknown mock rule '" + a.backend + "'");
    require(a.lexicon);
    backend = std::make_unique<MockBackend>(*rule, load_lexicon(a.lexicon, c.tgt_lang));
  } else if (a.backend == "offline") {
    require(a.offline);
    backend = std::make_unique<OfflineBackend>(load_translations(a.offline));
  } else if (a.backend == "service") {
    if (!a.endpoint.empty()) {
      const char* tok = std::getenv(kTokenEnv);
      backend = std::make_unique<HttpBackend>(
          a.endpoint, tok && *tok ? std::optional<std::string>(tok) : std::nullopt);
    } else {
      backend = std::make_unique<HttpBackend>(HttpBackend::from_environment());
    }
  } else {
    throw DomainError("unknown backend '" + a.backend + "'");
  }

  std::optional<TranslationCache> cache;
  if (!a.cache.empty()) cache.emplace(a.cache);
  BatchOptions opts;
  opts.max_in_flight = a.max_in_flight;
  opts.max_retries = a.retries;
  opts.initial_backoff = std::chrono::milliseconds(a.backoff_ms);
  opts.cache = cache ? &*cache : nullptr;
  const auto records = translate_batch(requests, dec, *backend, opts);

  std::vector<TranslationRecord> ok;
  std::size_t failed = 0;
  nlohmann::json log = nlohmann::json::array();
  for (const auto& r : records) {
    if (r.error) {
      ++failed;
      std::cerr << "error: " << r.instance_id << ": " << *r.error << "\n";
    } else {
      ok.push_back(r);
    }
  }
  write_file(a.out, serialize_translations(ok));
  if (!a.records_out.empty()) {
    std::string lines;
    for (const auto& r : records) {
      nlohmann::json j{{"instance_id", r.instance_id}, {"digest", r.digest},
                       {"output", r.output},           {"backend", r.backend},
                       {"decoding", r.decoding}};
      if (r.error) j["error"] = *r.error;
      if (r.warning) j["warning"] = *r.warning;
      lines += j.dump() + "\n";
    }
    write_file(a.records_out, lines);
  }
  std::cout << "translated " << ok.size() << "/" << records.size() << " instances\n";
  return failed ? 2 : 0;
}

// ---------------------------------------------------------------- attribute

struct AttributeArgs {
  std::string corpus, translations, attr_dir, write_attr, out;
  std::optional<std::uint64_t> reference_seed;
  int steps = kDefaultIgSteps;
  std::size_t hidden = 8;
  std::size_t threads = 1;
  bool allow_untagged = false;
};

int run_attribute(const AttributeArgs& a, const Common& c) {
  const auto corpus = load_corpus(a.corpus, c, a.allow_untagged);
  std::vector<MatrixLine> out;
  if (!a.attr_dir.empty()) {
    require(a.attr_dir);
    std::map<std::string, WordAttributionMatrix> by_id;
    for (const auto& entry : fs::directory_iterator(a.attr_dir)) {
      if (entry.path().extension() != ".attr") continue;
      const auto tensor = read_tensor(entry.path());
      if (!corpus.find(tensor.instance_id)) continue;
      if (!by_id.emplace(tensor.instance_id, aggregate(tensor)).second) {
        throw ValidationError("two .attr files for instance " + tensor.instance_id);
      }
    }
    for (const auto& inst : corpus.instances()) {
      auto it = by_id.find(inst.id);
      if (it != by_id.end()) out.push_back({inst.id, it->second});
    }
  } else if (a.reference_seed) {
    if (a.translations.empty()) throw DomainError("--reference-seed needs --translations");
    require(a.translations, "translate");
    const auto translations = load_translations(a.translations);
    ReferenceModelShape shape;
    shape.embedding_width = a.hidden;
    shape.max_positions = 256;
    const ReferenceModel model(*a.reference_seed, shape);

    std::vector<const WinoMtInstance*> jobs;
    for (const auto& inst : corpus.instances()) {
      auto it = translations.find(inst.id);
      if (it != translations.end() && !words(it->second).empty()) jobs.push_back(&inst);
    }
    std::vector<std::optional<AttributionTensor>> tensors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
        tensors[k] = attribute_with_reference(model, jobs[k]->id, jobs[k]->source_text,
                                              translations.at(jobs[k]->id), a.steps);
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < std::max<std::size_t>(1, a.threads); ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    if (!a.write_attr.empty()) fs::create_directories(a.write_attr);
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      if (!a.write_attr.empty()) {
        nlohmann::json extra{{"producer", "reference-model"},
                             {"seed", *a.reference_seed},
                             {"steps", a.steps},
                             {"scalar", "logit"}};
        write_tensor(*tensors[k], fs::path(a.write_attr) / ("instance-" + std::to_string(k) + ".attr"),
                     extra);
      }
      out.push_back({jobs[k]->id, aggregate(*tensors[k])});
    }
  } else {
    throw DomainError("attribute needs --attr-dir or --reference-seed");
  }
  write_file(a.out, to_jsonl(out));
  std::cout << "attributions for " << out.size() << "/" << corpus.size() << " instances\n";
  return 0;
}

// ---------------------------------------------------------------- match

struct MatchArgs {
  std::string corpus, translations, lexicon, out;
  bool allow_untagged = false;
};

int run_match(const MatchArgs& a, const Common& c) {
  const auto corpus = load_corpus(a.corpus, c, a.allow_untagged);
  require(a.translations, "translate");
  require(a.lexicon);
  const auto translations = load_translations(a.translations);
  const auto lexicon = load_lexicon(a.lexicon, c.tgt_lang);
  std::vector<MatchLine> lines;
  std::vector<ProfessionMatch> matches;
  std::size_t untranslated = 0;
  for (const auto& inst : corpus.instances()) {
    auto it = translations.find(inst.id);
    ProfessionMatch m;
    if (it == translations.end()) ++untranslated;
    else m = match_profession(it->second, inst.target_profession, lexicon);
    lines.push_back({inst.id, m});
    matches.push_back(m);
  }
  write_file(a.out, to_jsonl(lines));
  if (untranslated) std::cerr << "warning: " << untranslated << " instances have no translation\n";
  if (!matches.empty()) std::cout << "match rate " << pct(match_rate(matches)) << "%\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string corpus, matches, attributions, out;
  bool allow_untagged = false;
};

int run_evaluate(const EvaluateArgs& a, const Common& c) {
  const auto corpus = load_corpus(a.corpus, c, a.allow_untagged);
  require(a.matches, "match");
  std::map<std::string, ProfessionMatch> matches;
  for (auto& m : from_jsonl<MatchLine>(read_file(a.matches))) matches[m.instance_id] = m.match;
  std::map<std::string, WordAttributionMatrix> matrices;
  if (!a.attributions.empty()) {
    require(a.attributions, "attribute");
    for (auto& m : from_jsonl<MatrixLine>(read_file(a.attributions))) {
      matrices[m.instance_id] = std::move(m.matrix);
    }
  }
  std::vector<EvaluationRecord> records;
  for (const auto& inst : corpus.instances()) {
    auto mit = matches.find(inst.id);
    const ProfessionMatch match = mit == matches.end() ? ProfessionMatch{} : mit->second;
    std::optional<AttributionTriple> triple;
    auto ait = matrices.find(inst.id);
    if (match.found && ait != matrices.end()) {
      try {
        triple = extract_triple(ait->second, inst, match);
      } catch (const Error& e) {
        std::cerr << "warning: " << e.kind() << ": " << e.what() << "\n";
      }
    }
    records.push_back(make_record(inst, match, triple));
  }
  save_records(records, a.out);
  const auto binary = binary_records(records);
  if (binary.empty()) {
    std::cout << "no gendered instances\n";
    return 0;
  }
  const auto report = bias_report(records);
  std::cout << render_bias_table(report);
  return 0;
}

// ---------------------------------------------------------------- disaggregate

struct DisaggregateArgs {
  std::string records, csv;
};

int run_disaggregate(const DisaggregateArgs& a) {
  require(a.records, "evaluate");
  const auto records = load_records(a.records);
  const auto cells = disaggregate(records);
  std::cout << render_cells_table(cells);
  std::cout << "\nScore RelDiff(%)\n";
  for (auto [name, s] : {std::pair{"a_prof", Score::Prof}, std::pair{"a_pron", Score::Pron}}) {
    try {
      std::cout << name << " " << format_fixed(correct_wrong_relative_diff(records, s), 2) << "\n";
    } catch (const DomainError&) {
      std::cout << name << " -\n";
    }
  }
  if (!a.csv.empty()) {
    ReportBundle b;
    b.bias = BiasReport{};
    b.bias->cells = cells;
    write_file(a.csv, render_csv(b).at("cells"));
  }
  return 0;
}

// ---------------------------------------------------------------- select-exemplars

struct SelectArgs {
  std::string records, corpus, out;
  double q = kDefaultPoolFraction;
  std::size_t n = 4;
  std::uint64_t seed = kDefaultSelectionSeed;
  std::vector<std::size_t> allocation;
  bool allow_untagged = false;
};

int run_select(const SelectArgs& a, const Common& c) {
  require(a.records, "evaluate");
  const auto corpus = load_corpus(a.corpus, c, a.allow_untagged);
  const auto records = load_records(a.records);
  SelectionConfig cfg;
  cfg.n = a.n;
  cfg.seed = a.seed;
  if (!a.allocation.empty()) {
    if (a.allocation.size() != 4) throw DomainError("--allocation takes four counts");
    cfg.allocation = std::array<std::size_t, 4>{a.allocation[0], a.allocation[1], a.allocation[2],
                                                a.allocation[3]};
  }
  const auto set = select_exemplars(build_pool(records, a.q), corpus, cfg);
  write_file(a.out, nlohmann::json(set).dump(2) + "\n");
  for (const auto& ex : set.exemplars) {
    std::cout << stratum_name(ex.stratum) << " " << ex.instance_id << " "
              << format_fixed(ex.a_pron_prof, 4) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- build-prompts

struct PromptsArgs {
  std::string exemplars, human, corpus, out, prefix_out, resolved_out;
  std::string nt_policy = "NT-Female";
  bool allow_untagged = false;
};

int run_build_prompts(const PromptsArgs& a, const Common& c) {
  require(a.exemplars, "select-exemplars");
  require(a.human);
  const auto corpus = load_corpus(a.corpus, c, a.allow_untagged);
  const auto policy = parse_nt_policy(a.nt_policy);
  if (!policy) throw DomainError("unknown NT policy '" + a.nt_policy + "'");
  auto set = nlohmann::json::parse(read_file(a.exemplars)).get<ExemplarSet>();
  set = resolve_translations(std::move(set), load_human_translations(a.human), *policy);
  const auto language = language_name(c.tgt_lang);

  std::vector<PromptLine> prompts;
  for (const auto& inst : corpus.instances()) {
    prompts.push_back({inst.id, build_fewshot_prompt(set, inst.source_text, language)});
  }
  write_file(a.out, to_jsonl(prompts));
  if (!a.prefix_out.empty()) write_file(a.prefix_out, fewshot_prefix(set, language));
  if (!a.resolved_out.empty()) write_file(a.resolved_out, nlohmann::json(set).dump(2) + "\n");
  std::cout << "built " << prompts.size() << " prompts with " << set.exemplars.size()
            << " exemplars (" << to_string(*policy) << ")\n";
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string a, b;
  std::string metric = "accuracy";
  BootstrapConfig config;
};

int run_compare(const CompareArgs& a) {
  require(a.a, "evaluate");
  require(a.b, "evaluate");
  BootstrapConfig cfg = a.config;
  if (a.metric == "accuracy") cfg.metric = BootstrapMetric::Accuracy;
  else if (a.metric == "macro-f1") cfg.metric = BootstrapMetric::MacroF1;
  else throw DomainError("unknown metric '" + a.metric + "'");
  const auto res = bootstrap_compare(load_records(a.a), load_records(a.b), cfg);
  nlohmann::json j{{"p_value", res.p_value},   {"resamples", cfg.resamples},
                   {"sample_fraction", cfg.sample_fraction}, {"seed", cfg.seed},
                   {"metric", a.metric}};
  std::cout << j.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- gnt

struct GntArgs {
  std::string records;
};

int run_gnt(const GntArgs& a) {
  require(a.records, "evaluate");
  std::vector<EvaluationRecord> neutral;
  for (auto& r : load_records(a.records)) {
    if (r.gold_gender == Gender::Neutral) neutral.push_back(std::move(r));
  }
  std::cout << render_gnt_table(analyze_gnt(neutral));
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string records, corpus, lexicon, out_dir;
  std::string backend_tag = "unknown";
  std::string template_id = "T1";
  std::string nt_policy = "none";
  std::vector<std::string> formats{"structured", "table", "delimited"};
  std::vector<std::string> seeds;
  std::string decoding_json = "{}";
};

int run_report(const ReportArgs& a) {
  require(a.records, "evaluate");
  const auto records = load_records(a.records);
  ReportBundle b;
  if (!a.corpus.empty()) {
    require(a.corpus);
    b.manifest.corpus_digest = file_digest(a.corpus);
  }
  if (!a.lexicon.empty()) {
    require(a.lexicon);
    b.manifest.lexicon_digest = file_digest(a.lexicon);
  }
  b.manifest.backend = a.backend_tag;
  b.manifest.template_id = a.template_id;
  b.manifest.nt_policy = a.nt_policy;
  b.manifest.decoding = nlohmann::json::parse(a.decoding_json);
  for (const auto& s : a.seeds) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw DomainError("--seed expects name=value, got '" + s + "'");
    b.manifest.seeds[s.substr(0, eq)] = std::stoull(s.substr(eq + 1));
  }
  if (!binary_records(records).empty()) b.bias = bias_report(records);
  for (auto [name, s] : {std::pair{"a_ctrl", Score::Ctrl}, std::pair{"a_prof", Score::Prof},
                         std::pair{"a_pron", Score::Pron}}) {
    try {
      b.relative_diff[name] = correct_wrong_relative_diff(binary_records(records), s);
    } catch (const DomainError&) {
    }
  }
  std::vector<EvaluationRecord> neutral;
  for (const auto& r : records) {
    if (r.gold_gender == Gender::Neutral) neutral.push_back(r);
  }
  if (!neutral.empty()) b.gnt = analyze_gnt(neutral);

  for (const auto& f : a.formats) {
    ReportFormat fmt;
    if (f == "structured") fmt = ReportFormat::Structured;
    else if (f == "table") fmt = ReportFormat::Table;
    else if (f == "delimited") fmt = ReportFormat::Delimited;
    else throw DomainError("unknown report format '" + f + "'");
    for (const auto& p : render(b, fmt, a.out_dir)) std::cout << "wrote " << p.string() << "\n";
  }
  return 0;
}

void print_error(const std::string& kind, const std::string& message) {
  nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occupational gender-bias evaluation for machine translation"};
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);
  Common common;
  app.add_option("--src-lang", common.src_lang, "Source language code")->capture_default_str();
  app.add_option("--tgt-lang", common.tgt_lang, "Target language code")->capture_default_str();

  int rc = 0;

  TranslateArgs ta;
  auto* translate = app.add_subcommand("translate", "Obtain translations for a corpus");
  translate->add_option("--corpus", ta.corpus)->required();
  translate->add_option("--out", ta.out)->required();
  translate->add_option("--backend", ta.backend,
                        "mock:stereotype-follower | mock:pronoun-follower | offline | service")
      ->capture_default_str();
  translate->add_option("--lexicon", ta.lexicon, "Lexicon TSV (mock backends)");
  translate->add_option("--offline", ta.offline, "instance_id<TAB>translation file");
  translate->add_option("--endpoint", ta.endpoint, std::string("Service URL (default $") + kEndpointEnv + ")");
  translate->add_option("--template", ta.template_id, "T1 | T2 | QA")->capture_default_str();
  translate->add_option("--prompts", ta.prompts, "Prompt file from build-prompts (QA)");
  translate->add_option("--strategy", ta.strategy, "greedy | beam | top_k | top_p | contrastive")
      ->capture_default_str();
  translate->add_option("--num-beams", ta.num_beams)->capture_default_str();
  translate->add_option("--top-k", ta.top_k);
  translate->add_option("--top-p", ta.top_p);
  translate->add_option("--temperature", ta.temperature);
  translate->add_option("--penalty-alpha", ta.penalty_alpha);
  translate->add_option("--max-tokens", ta.max_tokens)->capture_default_str();
  translate->add_option("--cache", ta.cache, "Append-only response cache");
  translate->add_option("--max-in-flight", ta.max_in_flight)->capture_default_str();
  translate->add_option("--retries", ta.retries)->capture_default_str();
  translate->add_option("--backoff-ms", ta.backoff_ms)->capture_default_str();
  translate->add_option("--records-out", ta.records_out, "JSONL log with digests and errors");
  translate->add_flag("--allow-untagged", ta.allow_untagged);
  translate->callback([&] { rc = run_translate(ta, common); });

  AttributeArgs aa;
  auto* attribute = app.add_subcommand("attribute", "Word attribution matrices per instance");
  attribute->add_option("--corpus", aa.corpus)->required();
  attribute->add_option("--out", aa.out)->required();
  attribute->add_option("--attr-dir", aa.attr_dir, "Directory of .attr files to ingest");
  attribute->add_option("--reference-seed", aa.reference_seed, "Run the seeded reference model");
  attribute->add_option("--translations", aa.translations);
  attribute->add_option("--steps", aa.steps, "Integration steps")->capture_default_str();
  attribute->add_option("--hidden", aa.hidden, "Reference embedding width")->capture_default_str();
  attribute->add_option("--threads", aa.threads)->capture_default_str();
  attribute->add_option("--write-attr", aa.write_attr, "Also write raw .attr files here");
  attribute->add_flag("--allow-untagged", aa.allow_untagged);
  attribute->callback([&] { rc = run_attribute(aa, common); });

  MatchArgs ma;
  auto* match = app.add_subcommand("match", "Dictionary-match professions in translations");
  match->add_option("--corpus", ma.corpus)->required();
  match->add_option("--translations", ma.translations)->required();
  match->add_option("--lexicon", ma.lexicon)->required();
  match->add_option("--out", ma.out)->required();
  match->add_flag("--allow-untagged", ma.allow_untagged);
  match->callback([&] { rc = run_match(ma, common); });

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Build evaluation records and bias metrics");
  evaluate->add_option("--corpus", ea.corpus)->required();
  evaluate->add_option("--matches", ea.matches)->required();
  evaluate->add_option("--attributions", ea.attributions);
  evaluate->add_option("--out", ea.out)->required();
  evaluate->add_flag("--allow-untagged", ea.allow_untagged);
  evaluate->callback([&] { rc = run_evaluate(ea, common); });

  DisaggregateArgs da;
  auto* disagg = app.add_subcommand("disaggregate", "Per-cell accuracy and attribution means");
  disagg->add_option("--records", da.records)->required();
  disagg->add_option("--csv", da.csv);
  disagg->callback([&] { rc = run_disaggregate(da); });

  SelectArgs sa;
  auto* select = app.add_subcommand("select-exemplars", "Pick few-shot exemplars");
  select->add_option("--records", sa.records)->required();
  select->add_option("--corpus", sa.corpus)->required();
  select->add_option("--out", sa.out)->required();
  select->add_option("--q", sa.q, "Pool fraction per stratum")->capture_default_str();
  select->add_option("--n", sa.n)->capture_default_str();
  select->add_option("--seed", sa.seed)->capture_default_str();
  select->add_option("--allocation", sa.allocation, "Per-stratum counts: ProF ProM AntiF AntiM");
  select->add_flag("--allow-untagged", sa.allow_untagged);
  select->callback([&] { rc = run_select(sa, common); });

  PromptsArgs pa;
  auto* prompts = app.add_subcommand("build-prompts", "Render few-shot prompts");
  prompts->add_option("--exemplars", pa.exemplars)->required();
  prompts->add_option("--human", pa.human, "instance_id<TAB>nt_female<TAB>nt_male")->required();
  prompts->add_option("--corpus", pa.corpus)->required();
  prompts->add_option("--out", pa.out)->required();
  prompts->add_option("--nt-policy", pa.nt_policy, "NT-Female | NT-Male | NT-Random")
      ->capture_default_str();
  prompts->add_option("--prefix-out", pa.prefix_out, "Raw bytes of the exemplar prefix");
  prompts->add_option("--resolved-out", pa.resolved_out);
  prompts->add_flag("--allow-untagged", pa.allow_untagged);
  prompts->callback([&] { rc = run_build_prompts(pa, common); });

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "Paired bootstrap test: is A better than B?");
  compare->add_option("--a", ca.a)->required();
  compare->add_option("--b", ca.b)->required();
  compare->add_option("--metric", ca.metric, "accuracy | macro-f1")->capture_default_str();
  compare->add_option("--resamples", ca.config.resamples)->capture_default_str();
  compare->add_option("--fraction", ca.config.sample_fraction)->capture_default_str();
  compare->add_option("--seed", ca.config.seed)->capture_default_str();
  compare->add_option("--threads", ca.config.threads)->capture_default_str();
  compare->callback([&] { rc = run_compare(ca); });

  GntArgs ga;
  auto* gnt = app.add_subcommand("gnt", "Gender-neutral subset statistics");
  gnt->add_option("--records", ga.records)->required();
  gnt->callback([&] { rc = run_gnt(ga); });

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Write report files");
  report->add_option("--records", ra.records)->required();
  report->add_option("--out-dir", ra.out_dir)->required();
  report->add_option("--corpus", ra.corpus);
  report->add_option("--lexicon", ra.lexicon);
  report->add_option("--backend-tag", ra.backend_tag)->capture_default_str();
  report->add_option("--template", ra.template_id)->capture_default_str();
  report->add_option("--nt-policy", ra.nt_policy)->capture_default_str();
  report->add_option("--decoding", ra.decoding_json, "Decoding config as JSON");
  report->add_option("--seed", ra.seeds, "name=value, repeatable");
  report->add_option("--format", ra.formats, "structured | table | delimited")->capture_default_str();
  report->callback([&] { rc = run_report(ra); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal-error", e.what());
    return 1;
  }
  return rc;
}
