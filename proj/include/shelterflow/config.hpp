#pragma once

#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "shelterflow/cohorts.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/export.hpp"
#include "shelterflow/flowgraph.hpp"
#include "shelterflow/ingest.hpp"
#include "shelterflow/journeys.hpp"
#include "shelterflow/stats.hpp"
#include "shelterflow/synthgen.hpp"

namespace shelterflow {

struct RunConfig {
  std::vector<std::string> inputs;
  std::string output_dir = "out";
  SchemaConfig schema;
  CohortConfig cohorts = CohortConfig::published();
  std::vector<Period> periods = default_periods();
  std::string baseline_period = "pre-lockdown";
  GapRule gap;
  TransitionMode transition_mode = TransitionMode::direct;  // statistics
  std::optional<TransitionMode> timeline_mode;               // must be chosen explicitly
  int smoothing_window = 7;
  GraphStyleConfig style;
  synth::GeneratorParams generator;

  // Eras with the published normalization lengths (687/381/639 days).
  static std::vector<Period> default_periods() {
    return {
        {"pre-lockdown", {Day::from_ymd(2018, 3, 1), Day::from_ymd(2020, 3, 18)}, 687},
        {"lockdown", {Day::from_ymd(2020, 3, 18), Day::from_ymd(2021, 7, 2)}, 381},
        {"post-lockdown", {Day::from_ymd(2021, 7, 2), Day::from_ymd(2023, 5, 2)}, 639},
    };
  }

  const Period* find_period(std::string_view name) const {
    for (const auto& p : periods)
      if (p.name == name) return &p;
    return nullptr;
  }

  void validate() const {
    cohorts.validate();
    style.validate();
    if (gap.threshold_days < 1) throw ConfigError("gap.threshold_days must be >= 1");
    if (smoothing_window < 1) throw ConfigError("timeline.smoothing_window must be >= 1");
    if (periods.empty()) throw ConfigError("at least one period is required");
    std::set<std::string> names;
    for (const auto& p : periods) {
      if (p.name.empty()) throw ConfigError("period name must be non-empty");
      if (p.name.find_first_of("/\\ ") != std::string::npos)
        throw ConfigError("period name '" + p.name + "' may not contain spaces or slashes");
      if (!names.insert(p.name).second) throw ConfigError("duplicate period name '" + p.name + "'");
      if (p.range.empty()) throw ConfigError("period '" + p.name + "' has an empty date range");
      if (p.duration_override && *p.duration_override <= 0)
        throw ConfigError("period '" + p.name + "' duration_days must be positive");
    }
    if (!find_period(baseline_period))
      throw ConfigError("baseline_period '" + baseline_period + "' is not a defined period");
    if (schema.min_date > schema.max_date) throw ConfigError("schema.min_date is after schema.max_date");
  }
};

namespace config_detail {

using nlohmann::json;

inline void expect_keys(const json& j, std::initializer_list<const char*> keys, const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown key '" + k + "' in " + ctx);
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& ctx) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(ctx + "." + key + ": " + e.what());
  }
}

inline Day get_day(const json& j, const char* key, const std::string& ctx) {
  return parse_iso_or_throw(get<std::string>(j, key, ctx), ctx + "." + key);
}

template <class T>
void maybe(const json& j, const char* key, T& out, const std::string& ctx) {
  if (j.contains(key)) out = get<T>(j, key, ctx);
}

inline void maybe_day(const json& j, const char* key, Day& out, const std::string& ctx) {
  if (j.contains(key)) out = get_day(j, key, ctx);
}

inline void maybe_override(const json& j, const char* key, std::optional<Day>& out, const std::string& ctx) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) out.reset();
  else out = get_day(j, key, ctx);
}

inline synth::IntRange get_range(const json& j, const char* key, const std::string& ctx) {
  auto v = get<std::vector<std::int32_t>>(j, key, ctx);
  if (v.size() != 2) throw ConfigError(ctx + "." + key + " must be [lo, hi]");
  return {v[0], v[1]};
}

inline void apply_archetype(const json& j, synth::ArchetypeParams& a, const std::string& ctx) {
  expect_keys(j, {"proportion", "episodes", "active_days", "gap_days", "attendance"}, ctx);
  maybe(j, "proportion", a.proportion, ctx);
  if (j.contains("episodes")) a.episodes = get_range(j, "episodes", ctx);
  if (j.contains("active_days")) a.active_days = get_range(j, "active_days", ctx);
  if (j.contains("gap_days")) a.gap_days = get_range(j, "gap_days", ctx);
  maybe(j, "attendance", a.attendance, ctx);
}

inline void apply_generator(const json& j, synth::GeneratorParams& g) {
  const std::string ctx = "generator";
  expect_keys(j, {"n_persons", "shelters", "archetypes", "p_move", "p_multi", "p_overlap_record", "span", "shock", "seed"},
              ctx);
  maybe(j, "n_persons", g.n_persons, ctx);
  maybe(j, "p_move", g.p_move, ctx);
  maybe(j, "p_multi", g.p_multi, ctx);
  maybe(j, "p_overlap_record", g.p_overlap_record, ctx);
  maybe(j, "seed", g.seed, ctx);
  if (j.contains("shelters")) {
    g.shelters.clear();
    for (const auto& s : j.at("shelters")) {
      expect_keys(s, {"name", "popularity"}, ctx + ".shelters[]");
      synth::ShelterSpec spec{get<std::string>(s, "name", ctx + ".shelters[]"), 1.0};
      maybe(s, "popularity", spec.popularity, ctx + ".shelters[]");
      g.shelters.push_back(std::move(spec));
    }
  }
  if (j.contains("archetypes")) {
    const auto& a = j.at("archetypes");
    expect_keys(a, {"transient", "episodic", "chronic"}, ctx + ".archetypes");
    if (a.contains("transient")) apply_archetype(a.at("transient"), g.transient, ctx + ".archetypes.transient");
    if (a.contains("episodic")) apply_archetype(a.at("episodic"), g.episodic, ctx + ".archetypes.episodic");
    if (a.contains("chronic")) apply_archetype(a.at("chronic"), g.chronic, ctx + ".archetypes.chronic");
  }
  if (j.contains("span")) {
    const auto& s = j.at("span");
    expect_keys(s, {"start", "end"}, ctx + ".span");
    maybe_day(s, "start", g.span.start, ctx + ".span");
    maybe_day(s, "end", g.span.end, ctx + ".span");
  }
  if (j.contains("shock")) {
    const auto& s = j.at("shock");
    expect_keys(s, {"start", "end", "entry_multiplier", "activity_multiplier"}, ctx + ".shock");
    maybe_day(s, "start", g.shock.range.start, ctx + ".shock");
    maybe_day(s, "end", g.shock.range.end, ctx + ".shock");
    maybe(s, "entry_multiplier", g.shock.entry_multiplier, ctx + ".shock");
    maybe(s, "activity_multiplier", g.shock.activity_multiplier, ctx + ".shock");
  }
}

inline TransitionMode parse_mode(const std::string& s, const std::string& ctx) {
  auto m = transition_mode_from_string(s);
  if (!m) throw ConfigError(ctx + ": transition mode must be 'direct' or 'mobility', got '" + s + "'");
  return *m;
}

inline GapComparison parse_comparison(const std::string& s) {
  if (s == "greater" || s == ">") return GapComparison::greater;
  if (s == "greater_equal" || s == ">=") return GapComparison::greater_equal;
  throw ConfigError("gap.comparison must be 'greater' or 'greater_equal', got '" + s + "'");
}

inline const char* to_string(GapComparison c) {
  return c == GapComparison::greater ? "greater" : "greater_equal";
}

inline char parse_delimiter(const std::string& s) {
  if (s.empty() || s == "auto") return '\0';
  if (s == "\\t" || s == "tab") return '\t';
  if (s.size() != 1) throw ConfigError("schema.delimiter must be a single character, 'tab' or 'auto'");
  return s[0];
}

inline std::string delimiter_name(char c) {
  if (c == '\0') return "auto";
  if (c == '\t') return "tab";
  return std::string(1, c);
}

}  // namespace config_detail

// Overlays the fields present in `j` onto `cfg`; unknown keys are errors.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  using namespace config_detail;
  expect_keys(j, {"inputs", "output_dir", "schema", "cohorts", "periods", "baseline_period", "gap",
                  "transition_mode", "timeline", "style", "generator"},
              "config");
  maybe(j, "inputs", cfg.inputs, "config");
  maybe(j, "output_dir", cfg.output_dir, "config");
  maybe(j, "baseline_period", cfg.baseline_period, "config");

  if (j.contains("schema")) {
    const auto& s = j.at("schema");
    const std::string ctx = "schema";
    expect_keys(s, {"person_column", "date_column", "shelter_column", "duration_column", "delimiter",
                    "date_format", "min_date", "max_date", "max_duration_days"},
                ctx);
    maybe(s, "person_column", cfg.schema.person_column, ctx);
    maybe(s, "date_column", cfg.schema.date_column, ctx);
    maybe(s, "shelter_column", cfg.schema.shelter_column, ctx);
    maybe(s, "duration_column", cfg.schema.duration_column, ctx);
    if (s.contains("delimiter")) cfg.schema.delimiter = parse_delimiter(get<std::string>(s, "delimiter", ctx));
    if (s.contains("date_format")) {
      auto f = date_format_from_string(get<std::string>(s, "date_format", ctx));
      if (!f) throw ConfigError("schema.date_format must be %Y-%m-%d, %d/%m/%Y or %m/%d/%Y");
      cfg.schema.date_format = *f;
    }
    maybe_day(s, "min_date", cfg.schema.min_date, ctx);
    maybe_day(s, "max_date", cfg.schema.max_date, ctx);
    maybe(s, "max_duration_days", cfg.schema.max_duration_days, ctx);
  }

  if (j.contains("cohorts")) {
    const auto& c = j.at("cohorts");
    const std::string ctx = "cohorts";
    expect_keys(c, {"data_start", "data_end", "lockdown_start", "lockdown_end", "exclusion_days", "start_floor",
                    "end_ceiling", "during_entry_ceiling", "stayed_end_floor"},
                ctx);
    maybe_day(c, "data_start", cfg.cohorts.data_start, ctx);
    maybe_day(c, "data_end", cfg.cohorts.data_end, ctx);
    maybe_day(c, "lockdown_start", cfg.cohorts.lockdown_start, ctx);
    maybe_day(c, "lockdown_end", cfg.cohorts.lockdown_end, ctx);
    maybe(c, "exclusion_days", cfg.cohorts.exclusion_days, ctx);
    maybe_override(c, "start_floor", cfg.cohorts.start_floor_override, ctx);
    maybe_override(c, "end_ceiling", cfg.cohorts.end_ceiling_override, ctx);
    maybe_override(c, "during_entry_ceiling", cfg.cohorts.during_entry_ceiling_override, ctx);
    maybe_override(c, "stayed_end_floor", cfg.cohorts.stayed_end_floor_override, ctx);
  }

  if (j.contains("periods")) {
    cfg.periods.clear();
    for (const auto& p : j.at("periods")) {
      const std::string ctx = "periods[]";
      expect_keys(p, {"name", "start", "end", "duration_days"}, ctx);
      Period period{get<std::string>(p, "name", ctx), {get_day(p, "start", ctx), get_day(p, "end", ctx)},
                    std::nullopt};
      if (p.contains("duration_days") && !p.at("duration_days").is_null())
        period.duration_override = get<std::int32_t>(p, "duration_days", ctx);
      cfg.periods.push_back(std::move(period));
    }
  }

  if (j.contains("gap")) {
    const auto& g = j.at("gap");
    expect_keys(g, {"threshold_days", "comparison"}, "gap");
    maybe(g, "threshold_days", cfg.gap.threshold_days, "gap");
    if (g.contains("comparison")) cfg.gap.comparison = parse_comparison(get<std::string>(g, "comparison", "gap"));
  }

  if (j.contains("transition_mode"))
    cfg.transition_mode = parse_mode(get<std::string>(j, "transition_mode", "config"), "transition_mode");

  if (j.contains("timeline")) {
    const auto& t = j.at("timeline");
    expect_keys(t, {"mode", "smoothing_window"}, "timeline");
    if (t.contains("mode")) {
      if (t.at("mode").is_null()) cfg.timeline_mode.reset();
      else cfg.timeline_mode = parse_mode(get<std::string>(t, "mode", "timeline"), "timeline.mode");
    }
    maybe(t, "smoothing_window", cfg.smoothing_window, "timeline");
  }

  if (j.contains("style")) {
    const auto& s = j.at("style");
    const std::string ctx = "style";
    expect_keys(s, {"min_labeled_rate", "node_size_scale", "edge_width_scale", "grey_color", "precision", "sizing",
                    "gateway_size", "min_node_size"},
                ctx);
    maybe(s, "min_labeled_rate", cfg.style.min_labeled_rate, ctx);
    maybe(s, "node_size_scale", cfg.style.node_size_scale, ctx);
    maybe(s, "edge_width_scale", cfg.style.edge_width_scale, ctx);
    maybe(s, "grey_color", cfg.style.grey_color, ctx);
    maybe(s, "precision", cfg.style.precision, ctx);
    maybe(s, "gateway_size", cfg.style.gateway_size, ctx);
    maybe(s, "min_node_size", cfg.style.min_node_size, ctx);
    if (s.contains("sizing")) {
      auto v = get<std::string>(s, "sizing", ctx);
      if (v == "area") cfg.style.sizing = NodeSizing::area;
      else if (v == "diameter") cfg.style.sizing = NodeSizing::diameter;
      else throw ConfigError("style.sizing must be 'area' or 'diameter'");
    }
  }

  if (j.contains("generator")) apply_generator(j.at("generator"), cfg.generator);
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  apply_json(base, j);
  return base;
}

// Fully resolved configuration. The output directory is left out so that
// artifacts do not depend on where they are written.
inline nlohmann::json to_json(const RunConfig& c) {
  using namespace config_detail;
  json periods = json::array();
  for (const auto& p : c.periods)
    periods.push_back({{"name", p.name},
                       {"start", p.range.start.iso()},
                       {"end", p.range.end.iso()},
                       {"duration_days", p.duration_days()}});
  json style = {{"min_labeled_rate", c.style.min_labeled_rate},
                {"node_size_scale", c.style.node_size_scale},
                {"edge_width_scale", c.style.edge_width_scale},
                {"grey_color", c.style.grey_color},
                {"precision", c.style.precision},
                {"sizing", c.style.sizing == NodeSizing::area ? "area" : "diameter"},
                {"gateway_size", c.style.gateway_size},
                {"min_node_size", c.style.min_node_size}};
  json schema = {{"person_column", c.schema.person_column},
                 {"date_column", c.schema.date_column},
                 {"shelter_column", c.schema.shelter_column},
                 {"duration_column", c.schema.duration_column},
                 {"delimiter", delimiter_name(c.schema.delimiter)},
                 {"date_format", shelterflow::to_string(c.schema.date_format)},
                 {"min_date", c.schema.min_date.iso()},
                 {"max_date", c.schema.max_date.iso()},
                 {"max_duration_days", c.schema.max_duration_days}};
  json cohorts = shelterflow::to_json(c.cohorts);
  return {{"inputs", c.inputs},
          {"schema", schema},
          {"cohorts", cohorts},
          {"periods", periods},
          {"baseline_period", c.baseline_period},
          {"gap", {{"threshold_days", c.gap.threshold_days}, {"comparison", config_detail::to_string(c.gap.comparison)}}},
          {"transition_mode", shelterflow::to_string(c.transition_mode)},
          {"timeline",
           {{"mode", c.timeline_mode ? json(shelterflow::to_string(*c.timeline_mode)) : json(nullptr)},
            {"smoothing_window", c.smoothing_window}}},
          {"style", style}};
}

}  // namespace shelterflow
