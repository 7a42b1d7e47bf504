// shelterflow: shelter stay records -> flow graphs, cohort statistics and
// daily timelines.
//
// Exit codes: 0 ok, 1 config error, 2 input error, 3 internal invariant
// violation. Errors are reported on stderr as a JSON document.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shelterflow.hpp"

using namespace shelterflow;

namespace {

struct Overrides {
  std::string config_path;
  std::vector<std::string> inputs;
  std::optional<std::string> out;
  std::optional<int> gap_threshold;
  std::optional<std::string> gap_comparison;
  std::optional<int> exclusion_days;
  std::optional<std::string> date_format;
  std::optional<std::string> delimiter;
  std::optional<std::string> baseline;
  std::optional<std::string> mode;
  std::optional<int> smoothing;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> persons;
  std::optional<double> p_move;
  std::optional<double> p_multi;
  std::optional<double> shock_entry;
  std::optional<double> shock_activity;
  bool dump_sequences = false;
};

RunConfig resolve(const Overrides& o, const std::string& subcommand) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config_file(o.config_path);
  if (!o.inputs.empty()) cfg.inputs = o.inputs;
  if (o.out) cfg.output_dir = *o.out;
  if (o.gap_threshold) cfg.gap.threshold_days = *o.gap_threshold;
  if (o.gap_comparison) cfg.gap.comparison = config_detail::parse_comparison(*o.gap_comparison);
  if (o.exclusion_days) cfg.cohorts.exclusion_days = *o.exclusion_days;
  if (o.date_format) {
    auto f = date_format_from_string(*o.date_format);
    if (!f) throw ConfigError("--date-format must be %Y-%m-%d, %d/%m/%Y or %m/%d/%Y");
    cfg.schema.date_format = *f;
  }
  if (o.delimiter) cfg.schema.delimiter = config_detail::parse_delimiter(*o.delimiter);
  if (o.baseline) cfg.baseline_period = *o.baseline;
  if (o.mode) {
    const auto m = config_detail::parse_mode(*o.mode, "--mode");
    if (subcommand == "timeline") cfg.timeline_mode = m;
    else cfg.transition_mode = m;
  }
  if (o.smoothing) cfg.smoothing_window = *o.smoothing;
  if (o.seed) cfg.generator.seed = *o.seed;
  if (o.persons) cfg.generator.n_persons = *o.persons;
  if (o.p_move) cfg.generator.p_move = *o.p_move;
  if (o.p_multi) cfg.generator.p_multi = *o.p_multi;
  if (o.shock_entry) cfg.generator.shock.entry_multiplier = *o.shock_entry;
  if (o.shock_activity) cfg.generator.shock.activity_multiplier = *o.shock_activity;
  cfg.validate();
  return cfg;
}

Artifacts run(const std::string& subcommand, const RunConfig& cfg, bool dump_sequences) {
  if (subcommand == "simulate") return simulate_artifacts(cfg);
  const Analysis a = load_and_analyze(cfg);
  Artifacts out;
  if (subcommand == "validate") out = validate_artifacts(a, cfg);
  else if (subcommand == "graph") out = graph_artifacts(a, cfg);
  else if (subcommand == "timeline") out = timeline_artifacts(a, cfg);
  else if (subcommand == "stats") out = stats_artifacts(a, cfg);
  else if (subcommand == "cohorts") out = cohort_artifacts(a, cfg);
  else throw ConfigError("unknown subcommand '" + subcommand + "'");
  if (dump_sequences) out.merge(sequence_artifacts(a, cfg));
  return out;
}

int report_error(const char* kind, const std::string& message, int code, const std::optional<std::string>& out_dir) {
  const nlohmann::json diag = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << nlohmann::json{{"error", diag}}.dump() << '\n';
  if (out_dir) write_failure_marker(*out_dir, diag);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shelter stay records to flow graphs, cohort statistics and timelines"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config_path, "JSON config file; flags override its fields")
      ->check(CLI::ExistingFile);

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    if (needs_input) sub->add_option("inputs", o.inputs, "Input CSV/TSV files (gzip accepted)");
    sub->add_option("-o,--out", o.out, "Output directory");
    sub->add_option("--gap-threshold", o.gap_threshold, "Absence length in days that separates episodes");
    sub->add_option("--gap-comparison", o.gap_comparison, "greater (default) or greater_equal");
    sub->add_option("--exclusion-days", o.exclusion_days, "Cohort censoring margin in days");
    if (needs_input) {
      sub->add_option("--date-format", o.date_format, "%Y-%m-%d, %d/%m/%Y or %m/%d/%Y");
      sub->add_option("--delimiter", o.delimiter, "Field delimiter: a character, 'tab' or 'auto'");
      sub->add_flag("--dump-sequences", o.dump_sequences, "Also write per-person location sequences as JSON");
    }
  };

  auto* validate = app.add_subcommand("validate", "Ingest input and write the ingest report");
  add_common(validate, true);

  auto* graph = app.add_subcommand("graph", "Flow graphs per period plus graphs relative to the baseline period");
  add_common(graph, true);
  graph->add_option("--baseline", o.baseline, "Baseline period name for relative graphs");

  auto* timeline = app.add_subcommand("timeline", "Daily interaction, transition and ratio series");
  add_common(timeline, true);
  timeline->add_option("--mode", o.mode, "Transition mode: direct or mobility (required unless set in config)");
  timeline->add_option("--smoothing", o.smoothing, "Centered moving-average window in days (default 7)");

  auto* stats = app.add_subcommand("stats", "Per-period, per-cohort summary statistics");
  add_common(stats, true);
  stats->add_option("--mode", o.mode, "Transition mode for the transitions metric (default direct)");

  auto* cohorts = app.add_subcommand("cohorts", "Cohort census and per-person labels");
  add_common(cohorts, true);

  auto* simulate = app.add_subcommand("simulate", "Write a seeded synthetic corpus and its ground truth");
  add_common(simulate, false);
  simulate->add_option("--seed", o.seed, "Random seed");
  simulate->add_option("--persons", o.persons, "Number of persons");
  simulate->add_option("--p-move", o.p_move, "Per-interaction probability of moving shelter");
  simulate->add_option("--p-multi", o.p_multi, "Probability of a same-day multi-shelter visit");
  simulate->add_option("--shock-entry", o.shock_entry, "Entry-rate multiplier inside the shock window");
  simulate->add_option("--shock-activity", o.shock_activity, "Attendance multiplier inside the shock window");

  auto* config = app.add_subcommand("config", "Print the resolved configuration as JSON");
  add_common(config, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report_error("config", e.what(), 1, std::nullopt);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  std::optional<std::string> out_dir;
  try {
    const RunConfig cfg = resolve(o, name);
    if (name == "config") {
      std::cout << to_json(cfg).dump(2) << '\n';
      return 0;
    }
    out_dir = cfg.output_dir;
    const Artifacts artifacts = run(name, cfg, o.dump_sequences);
    write_artifacts(cfg.output_dir, artifacts);
    for (const auto& [file, _] : artifacts) std::cout << (std::filesystem::path(cfg.output_dir) / file).string() << '\n';
    return 0;
  } catch (const Error& e) {
    return report_error(e.kind_name(), e.what(), e.exit_code(), out_dir);
  } catch (const std::exception& e) {
    return report_error("invariant", e.what(), 3, out_dir);
  }
}
