#pragma once

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "shelterflow/cohorts.hpp"
#include "shelterflow/config.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/export.hpp"
#include "shelterflow/flowgraph.hpp"
#include "shelterflow/ingest.hpp"
#include "shelterflow/journeys.hpp"
#include "shelterflow/stats.hpp"
#include "shelterflow/synthgen.hpp"
#include "shelterflow/timeline.hpp"

namespace shelterflow {

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw InvariantError("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

// Everything the subcommands derive from the input, computed once.
struct Analysis {
  Corpus corpus;
  IngestReport report;
  std::vector<LocationSequence> sequences;  // sequences[i] belongs to corpus.persons[i]
  std::vector<CohortLabel> labels;          // labels[i] belongs to corpus.persons[i]
  std::string input_sha256;
};

inline Analysis analyze(ParseResult parsed, const RunConfig& cfg, std::string input_sha256 = {}) {
  Analysis a;
  a.report = std::move(parsed.report);
  a.corpus = expand_to_interaction_days(parsed.records);
  parsed.records.clear();
  parsed.records.shrink_to_fit();
  annotate_overlaps(a.report, a.corpus);
  a.sequences.reserve(a.corpus.persons.size());
  a.labels.reserve(a.corpus.persons.size());
  for (const auto& p : a.corpus.persons) {
    a.sequences.push_back(build_location_sequence(p, cfg.gap));
    a.labels.push_back(classify(p.first_day(), p.last_day(), cfg.cohorts));
  }
  a.input_sha256 = std::move(input_sha256);
  return a;
}

inline Analysis analyze_text(std::string_view text, const RunConfig& cfg) {
  return analyze(parse_records(text, cfg.schema), cfg, sha256_hex(text));
}

// Reads and parses every input file. With several inputs the hash covers
// their concatenation in the order given.
inline Analysis load_and_analyze(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw ConfigError("no input files given");
  ParseResult merged;
  std::string hash_input;
  for (const auto& path : cfg.inputs) {
    const std::string text = read_input_file(path);
    auto part = parse_records(text, cfg.schema);
    hash_input += sha256_hex(text);
    auto& r = merged.report;
    r.records_accepted += part.report.records_accepted;
    r.records_rejected += part.report.records_rejected;
    for (const auto& [k, v] : part.report.rejection_reasons) r.rejection_reasons[k] += v;
    for (const auto& e : part.report.rejection_examples)
      if (r.rejection_examples.size() < IngestReport::kMaxExamples) r.rejection_examples.push_back(e);
    if (part.report.date_range) {
      if (!r.date_range) r.date_range = part.report.date_range;
      else
        r.date_range = DateRange{std::min(r.date_range->start, part.report.date_range->start),
                                 std::max(r.date_range->end, part.report.date_range->end)};
    }
    merged.records.insert(merged.records.end(), std::make_move_iterator(part.records.begin()),
                          std::make_move_iterator(part.records.end()));
  }
  {
    std::set<std::string_view> persons, shelters;
    for (const auto& rec : merged.records) {
      persons.insert(rec.person_id);
      shelters.insert(rec.shelter_id);
    }
    merged.report.distinct_persons = persons.size();
    merged.report.distinct_shelters = shelters.size();
  }
  const std::string digest = cfg.inputs.size() == 1 ? hash_input : sha256_hex(hash_input);
  return analyze(std::move(merged), cfg, digest);
}

// ---------------------------------------------------------------------------
// Artifacts

using Artifacts = std::map<std::string, std::string>;

struct Provenance {
  nlohmann::json config;
  std::string input_sha256;

  nlohmann::json json() const { return {{"config", config}, {"input_sha256", input_sha256}}; }

  std::vector<std::string> comment_lines() const {
    return {"input_sha256: " + input_sha256, "config: " + config.dump()};
  }

  std::string csv_header() const {
    std::string out;
    for (const auto& line : comment_lines()) out += "# " + line + "\n";
    return out;
  }
};

inline Provenance provenance_for(const Analysis& a, const RunConfig& cfg) {
  return {to_json(cfg), a.input_sha256};
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json with_provenance(nlohmann::json body, const Provenance& prov) {
  body["provenance"] = prov.json();
  return body;
}

// Covers every person's whole record, including the Exit dated the day
// after their last interaction.
inline Window full_window(const Corpus& corpus) {
  if (corpus.persons.empty()) throw InputError("no persons in input");
  Day lo = corpus.persons.front().first_day(), hi = corpus.persons.front().last_day();
  for (const auto& p : corpus.persons) {
    lo = std::min(lo, p.first_day());
    hi = std::max(hi, p.last_day());
  }
  return Window::over({lo, hi + 2});
}

inline Artifacts validate_artifacts(const Analysis& a, const RunConfig& cfg) {
  return {{"ingest_report.json", dump(with_provenance(to_json(a.report), provenance_for(a, cfg)))}};
}

inline Artifacts sequence_artifacts(const Analysis& a, const RunConfig& cfg) {
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto& s : a.sequences) seqs.push_back(to_json(s, a.corpus.shelters));
  return {{"sequences.json", dump(with_provenance({{"sequences", seqs}}, provenance_for(a, cfg)))}};
}

inline Artifacts graph_artifacts(const Analysis& a, const RunConfig& cfg) {
  const auto prov = provenance_for(a, cfg);
  const auto comments = prov.comment_lines();
  Artifacts out;

  const auto full = build_flow_graph(a.corpus, a.sequences, full_window(a.corpus));
  out["graph_full.json"] = dump(with_provenance({{"graph", to_json(full)}}, prov));
  out["graph_full.dot"] = emit_dot(full, cfg.style, comments);

  std::map<std::string, RateGraph> rates;
  for (const auto& period : cfg.periods) {
    const auto g = build_flow_graph(a.corpus, a.sequences, period.window());
    rates[period.name] = to_rates(g);
    out["graph_" + period.name + ".json"] =
        dump(with_provenance({{"period", period.name}, {"graph", to_json(g)}, {"rates", to_json(rates[period.name])}},
                             prov));
    out["graph_" + period.name + ".dot"] = emit_dot(rates[period.name], cfg.style, comments);
  }
  const auto& baseline = rates.at(cfg.baseline_period);
  for (const auto& period : cfg.periods) {
    const auto& r = rates.at(period.name);
    if (period.name == cfg.baseline_period) {
      out["edges_" + period.name + ".csv"] = prov.csv_header() + edge_list_csv(r);
      continue;
    }
    const auto rel = normalize_relative(r, baseline, period.name, cfg.baseline_period);
    out["relative_" + period.name + ".json"] = dump(with_provenance(to_json(rel), prov));
    out["relative_" + period.name + ".dot"] = emit_dot(rel, cfg.style, comments);
    out["edges_" + period.name + ".csv"] = prov.csv_header() + edge_list_csv(r, &rel);
  }
  return out;
}

inline std::vector<DailySeries> timeline_series(const Analysis& a, const DateRange& range, TransitionMode mode,
                                                int smoothing) {
  std::vector<std::optional<CohortLabel>> filters{std::nullopt};
  for (auto c : kAllCohorts) filters.push_back(c);
  std::vector<DailySeries> inter, trans, ratio;
  for (const auto& f : filters) {
    inter.push_back(daily_interactions(a.corpus, a.labels, range, f, smoothing));
    trans.push_back(daily_transitions(a.sequences, a.labels, range, f, mode, smoothing));
    ratio.push_back(transition_ratio(trans.back(), inter.back()));
  }
  std::vector<DailySeries> all;
  for (auto* group : {&inter, &trans, &ratio})
    for (auto& s : *group) all.push_back(std::move(s));
  return all;
}

inline Artifacts timeline_artifacts(const Analysis& a, const RunConfig& cfg) {
  if (!cfg.timeline_mode)
    throw ConfigError("timeline needs an explicit transition mode (--mode direct|mobility)");
  const DateRange range{cfg.cohorts.data_start, cfg.cohorts.data_end + 1};
  const auto series = timeline_series(a, range, *cfg.timeline_mode, cfg.smoothing_window);
  return {{"timeline.csv", provenance_for(a, cfg).csv_header() + to_csv(series)}};
}

inline Artifacts stats_artifacts(const Analysis& a, const RunConfig& cfg) {
  const auto table = compute_stats_table(a.corpus, a.labels, cfg.periods, cfg.gap, cfg.transition_mode);
  const auto prov = provenance_for(a, cfg);
  return {{"stats.csv", prov.csv_header() + to_csv(table)}, {"stats.json", dump(with_provenance(to_json(table), prov))}};
}

inline Artifacts cohort_artifacts(const Analysis& a, const RunConfig& cfg) {
  const auto census = cohort_census(a.labels);
  std::string labels = "person_id,first_day,last_day,cohort\n";
  for (std::size_t i = 0; i < a.corpus.persons.size(); ++i) {
    const auto& p = a.corpus.persons[i];
    labels += csv_field(p.person_id) + "," + p.first_day().iso() + "," + p.last_day().iso() + "," +
              to_string(a.labels[i]) + "\n";
  }
  const auto prov = provenance_for(a, cfg);
  nlohmann::json body = to_json(census);
  body["bounds"] = to_json(cfg.cohorts);
  return {{"cohorts.json", dump(with_provenance(body, prov))},
          {"cohort_labels.csv", prov.csv_header() + labels}};
}

inline synth::GeneratorParams generator_params(const RunConfig& cfg) {
  auto p = cfg.generator;
  p.cohorts = cfg.cohorts;
  p.gap_rule = cfg.gap;
  return p;
}

// The generated CSV carries no comment header so it can be fed straight
// back to ingestion; parameters live in the sidecar.
inline Artifacts simulate_artifacts(const RunConfig& cfg) {
  const auto params = generator_params(cfg);
  const auto corpus = synth::generate_corpus(params);
  std::string csv = synth::to_csv(corpus.records);
  auto truth = synth::truth_to_json(corpus, params);
  truth["records_sha256"] = sha256_hex(csv);
  truth["config"] = to_json(cfg);
  return {{"records.csv", std::move(csv)}, {"ground_truth.json", dump(truth)}};
}

inline constexpr const char* kIncompleteMarker = "_INCOMPLETE";

// Writes each artifact via a temporary file. A marker file exists for the
// whole duration and is removed only once every artifact is in place.
inline void write_artifacts(const std::filesystem::path& dir, const Artifacts& artifacts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto marker = dir / kIncompleteMarker;
  {
    std::ofstream m(marker, std::ios::binary | std::ios::trunc);
    if (!m) throw InputError("cannot write to output directory '" + dir.string() + "'");
    m << "{\"status\": \"writing\"}\n";
  }
  for (const auto& [name, content] : artifacts) {
    const auto tmp = dir / (name + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      f.write(content.data(), static_cast<std::streamsize>(content.size()));
      if (!f) throw InputError("cannot write artifact '" + (dir / name).string() + "'");
    }
    fs::rename(tmp, dir / name, ec);
    if (ec) throw InputError("cannot finalize artifact '" + (dir / name).string() + "': " + ec.message());
  }
  fs::remove(marker, ec);
}

inline void write_failure_marker(const std::filesystem::path& dir, const nlohmann::json& diagnostic) {
  std::error_code ec;
  if (!std::filesystem::exists(dir, ec)) return;
  std::ofstream m(dir / kIncompleteMarker, std::ios::binary | std::ios::trunc);
  m << dump({{"status", "failed"}, {"error", diagnostic}});
}

}  // namespace shelterflow
