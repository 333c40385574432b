#pragma once

// Report rendering: a lossless JSON document, a human-readable text table,
// and CSV exports. Every table carries the digest of the run manifest.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtbias/digest.hpp"
#include "mtbias/error.hpp"
#include "mtbias/gnt.hpp"
#include "mtbias/metrics.hpp"
#include "mtbias/records_io.hpp"
#include "mtbias/text.hpp"

namespace mtbias {

inline constexpr const char* kToolVersion = "0.3.0";

struct RunManifest {
  std::string corpus_digest;
  std::string lexicon_digest;
  std::string backend;
  nlohmann::json decoding = nlohmann::json::object();
  std::string template_id;
  std::string nt_policy;
  std::map<std::string, std::uint64_t> seeds;
  std::string tool_version = kToolVersion;

  nlohmann::json to_json() const {
    return nlohmann::json{{"corpus_digest", corpus_digest}, {"lexicon_digest", lexicon_digest},
                          {"backend", backend},             {"decoding", decoding},
                          {"template_id", template_id},     {"nt_policy", nt_policy},
                          {"seeds", seeds},                 {"tool_version", tool_version}};
  }

  static RunManifest from_json(const nlohmann::json& j) {
    RunManifest m;
    m.corpus_digest = j.at("corpus_digest").get<std::string>();
    m.lexicon_digest = j.at("lexicon_digest").get<std::string>();
    m.backend = j.at("backend").get<std::string>();
    m.decoding = j.at("decoding");
    m.template_id = j.at("template_id").get<std::string>();
    m.nt_policy = j.at("nt_policy").get<std::string>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.tool_version = j.at("tool_version").get<std::string>();
    return m;
  }

  std::string digest() const { return sha256_hex(to_json().dump()); }
};

struct ReportBundle {
  RunManifest manifest;
  std::optional<BiasReport> bias;
  // Relative difference (%) of correct vs wrong translations per score.
  std::map<std::string, double> relative_diff;
  std::optional<GntReport> gnt;
};

// Half away from zero at `decimals`, after snapping to 1e-9 so binary
// representation error (7.249999999999999) does not decide the tie.
inline std::string format_fixed(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double snapped = std::round(value * 1e9) / 1e9;
  double rounded = std::round(snapped * scale) / scale;
  if (rounded == 0.0) rounded = 0.0;  // no "-0.0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

inline std::string pct(double fraction) { return format_fixed(fraction * 100.0, 1); }
inline std::string pct(const std::optional<double>& fraction) {
  return fraction ? pct(*fraction) : "-";
}
inline std::string score3(const std::optional<double>& v) { return v ? format_fixed(*v, 3) : "-"; }

inline std::string cell_name(const CellStats& c) {
  std::string s = c.stereotype == Stereotype::Pro    ? "Pro"
                  : c.stereotype == Stereotype::Anti ? "Anti"
                                                     : "None";
  s += "-";
  s += c.gold_gender == Gender::Female ? "F" : c.gold_gender == Gender::Male ? "M" : "N";
  return s;
}

// "Acc ΔG ΔS" row, percentages with one decimal.
inline std::string bias_row(const BiasReport& r) {
  return pct(r.accuracy) + " " + pct(r.delta_g) + " " + pct(r.delta_s);
}

namespace detail {

inline nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline std::string join(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += sep;
    out += fields[i];
  }
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string full(double v) { return nlohmann::json(v).dump(); }
inline std::string full(const std::optional<double>& v) { return v ? full(*v) : ""; }

}  // namespace detail

inline nlohmann::json to_structured(const ReportBundle& b) {
  nlohmann::json doc;
  doc["manifest"] = b.manifest.to_json();
  doc["manifest_digest"] = b.manifest.digest();
  if (b.bias) {
    const auto& r = *b.bias;
    nlohmann::json bias{{"accuracy", r.accuracy}, {"delta_g", r.delta_g},
                        {"delta_s", detail::opt(r.delta_s)}};
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) {
      cells.push_back({{"stereotype", std::string(to_string(c.stereotype))},
                       {"gold_gender", std::string(to_string(c.gold_gender))},
                       {"count", c.count},
                       {"matched", c.matched},
                       {"accuracy", detail::opt(c.accuracy)},
                       {"mean_ctrl", detail::opt(c.mean_ctrl)},
                       {"mean_prof", detail::opt(c.mean_prof)},
                       {"mean_pron", detail::opt(c.mean_pron)}});
    }
    bias["cells"] = cells;
    bias["per_profession_delta_g"] = r.per_profession.delta_g;
    bias["per_profession_omitted"] = r.per_profession.omitted;
    doc["bias"] = bias;
  }
  doc["relative_diff"] = b.relative_diff;
  if (b.gnt) {
    nlohmann::json buckets = nlohmann::json::array();
    for (const auto& s : b.gnt->buckets) {
      buckets.push_back({{"bucket", std::string(to_string(s.bucket))},
                         {"count", s.count},
                         {"share", s.share},
                         {"median_pron", detail::opt(s.median_pron)}});
    }
    doc["gnt"] = {{"total", b.gnt->total}, {"buckets", buckets}};
  }
  return doc;
}

inline std::string render_structured(const ReportBundle& b) { return to_structured(b).dump(2) + "\n"; }

inline ReportBundle parse_structured(std::string_view text) {
  ReportBundle b;
  try {
    const auto doc = nlohmann::json::parse(text);
    b.manifest = RunManifest::from_json(doc.at("manifest"));
    if (doc.contains("bias")) {
      const auto& j = doc["bias"];
      BiasReport r;
      r.accuracy = j.at("accuracy").get<double>();
      r.delta_g = j.at("delta_g").get<double>();
      r.delta_s = detail::opt_double(j, "delta_s");
      for (const auto& c : j.at("cells")) {
        CellStats cell;
        cell.stereotype = detail::enum_from<Stereotype>(c.at("stereotype"), parse_stereotype, "stereotype");
        cell.gold_gender = detail::enum_from<Gender>(c.at("gold_gender"), parse_gender, "gender");
        cell.count = c.at("count").get<std::size_t>();
        cell.matched = c.at("matched").get<std::size_t>();
        cell.accuracy = detail::opt_double(c, "accuracy");
        cell.mean_ctrl = detail::opt_double(c, "mean_ctrl");
        cell.mean_prof = detail::opt_double(c, "mean_prof");
        cell.mean_pron = detail::opt_double(c, "mean_pron");
        r.cells.push_back(cell);
      }
      r.per_profession.delta_g = j.at("per_profession_delta_g").get<std::map<std::string, double>>();
      r.per_profession.omitted = j.at("per_profession_omitted").get<std::vector<std::string>>();
      b.bias = r;
    }
    b.relative_diff = doc.at("relative_diff").get<std::map<std::string, double>>();
    if (doc.contains("gnt")) {
      GntReport g;
      g.total = doc["gnt"].at("total").get<std::size_t>();
      const auto& buckets = doc["gnt"].at("buckets");
      if (buckets.size() != 4) throw FormatError("gnt section needs four buckets");
      for (std::size_t k = 0; k < 4; ++k) {
        g.buckets[k].bucket = kGntBuckets[k];
        g.buckets[k].count = buckets[k].at("count").get<std::size_t>();
        g.buckets[k].share = buckets[k].at("share").get<double>();
        g.buckets[k].median_pron = detail::opt_double(buckets[k], "median_pron");
      }
      b.gnt = g;
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
  return b;
}

inline std::string render_bias_table(const BiasReport& r) {
  return "Acc ΔG ΔS\n" + bias_row(r) + "\n";
}

inline std::string render_cells_table(const std::vector<CellStats>& cells) {
  std::string out = "Cell n matched Acc a_ctrl a_prof a_pron\n";
  for (const auto& c : cells) {
    out += detail::join({cell_name(c), std::to_string(c.count), std::to_string(c.matched),
                         pct(c.accuracy), score3(c.mean_ctrl), score3(c.mean_prof),
                         score3(c.mean_pron)},
                        ' ');
    out += '\n';
  }
  return out;
}

inline std::string render_profession_table(const PerProfessionDeltaG& p) {
  std::string out = "Profession ΔG\n";
  for (const auto& [prof, dg] : p.delta_g) out += prof + " " + format_fixed(dg, 2) + "\n";
  return out;
}

inline std::string render_gnt_table(const GntReport& g) {
  std::string out = "Translated Matching(%) a_pron(median)\n";
  for (const auto& s : g.buckets) {
    out += std::string(to_string(s.bucket)) + " " + pct(s.share) + " " +
           (s.median_pron ? format_fixed(*s.median_pron, 4) : "-") + "\n";
  }
  return out;
}

inline std::string render_table(const ReportBundle& b) {
  std::string out = "# manifest " + b.manifest.digest() + "\n";
  if (b.bias) {
    out += "\n" + render_bias_table(*b.bias);
    out += "\n" + render_cells_table(b.bias->cells);
  }
  if (!b.relative_diff.empty()) {
    out += "\nScore RelDiff(%)\n";
    for (const auto& [name, v] : b.relative_diff) out += name + " " + format_fixed(v, 2) + "\n";
  }
  if (b.bias) out += "\n" + render_profession_table(b.bias->per_profession);
  if (b.gnt) out += "\n" + render_gnt_table(*b.gnt);
  return out;
}

// CSV files keyed by name (bias, cells, professions, gnt), full precision,
// each with a header row and a trailing manifest column.
inline std::map<std::string, std::string> render_csv(const ReportBundle& b) {
  using detail::csv_field;
  using detail::full;
  const std::string digest = b.manifest.digest();
  std::map<std::string, std::string> files;
  if (b.bias) {
    const auto& r = *b.bias;
    files["bias"] = "accuracy,delta_g,delta_s,manifest\n" + full(r.accuracy) + "," +
                    full(r.delta_g) + "," + full(r.delta_s) + "," + digest + "\n";
    std::string cells = "stereotype,gold_gender,count,matched,accuracy,mean_ctrl,mean_prof,mean_pron,manifest\n";
    for (const auto& c : r.cells) {
      cells += detail::join({std::string(to_string(c.stereotype)),
                             std::string(to_string(c.gold_gender)), std::to_string(c.count),
                             std::to_string(c.matched), full(c.accuracy), full(c.mean_ctrl),
                             full(c.mean_prof), full(c.mean_pron), digest},
                            ',') +
               "\n";
    }
    files["cells"] = cells;
    std::string profs = "profession,delta_g,manifest\n";
    for (const auto& [p, v] : r.per_profession.delta_g) {
      profs += csv_field(p) + "," + full(v) + "," + digest + "\n";
    }
    files["professions"] = profs;
  }
  if (b.gnt) {
    std::string g = "bucket,count,share,median_pron,manifest\n";
    for (const auto& s : b.gnt->buckets) {
      g += csv_field(std::string(to_string(s.bucket))) + "," + std::to_string(s.count) + "," +
           full(s.share) + "," + full(s.median_pron) + "," + digest + "\n";
    }
    files["gnt"] = g;
  }
  return files;
}

enum class ReportFormat { Structured, Table, Delimited };

// Writes report.json / report.txt / <name>.csv into `dir`.
inline std::vector<std::filesystem::path> render(const ReportBundle& b, ReportFormat format,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  switch (format) {
    case ReportFormat::Structured:
      written.push_back(dir / "report.json");
      write_file(written.back(), render_structured(b));
      break;
    case ReportFormat::Table:
      written.push_back(dir / "report.txt");
      write_file(written.back(), render_table(b));
      break;
    case ReportFormat::Delimited:
      for (const auto& [name, body] : render_csv(b)) {
        written.push_back(dir / (name + ".csv"));
        write_file(written.back(), body);
      }
      break;
  }
  return written;
}

}  // namespace mtbias
