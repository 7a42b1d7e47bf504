// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <sys/resource.h>

#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "dot_checker.hpp"
#include "support.hpp"

using namespace shelterflow;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Two-person worked example.
Outcome fig1_golden() {
  const auto t0 = Clock::now();
  auto a = sft::analyze_records(sft::fig1_records());
  const auto g = build_flow_graph(a.corpus, a.sequences, Window::over({sft::d0(), sft::d0() + 35}));
  const std::map<std::string, std::int64_t> want_nodes{{"A", 4}, {"B", 1}};
  const std::map<std::pair<std::string, std::string>, std::int64_t> want_edges{
      {{"Entry", "A"}, 2}, {{"A", "Exit"}, 1}, {{"A", "Gap"}, 1}, {{"Gap", "B"}, 1}, {{"B", "Exit"}, 1}};
  if (g.named_node_weights() != want_nodes) return {false, "node weights differ"};
  if (g.named_edge_weights() != want_edges) return {false, "edge weights differ"};

  const std::string want_json =
      R"({"edges":[{"from":"A","to":"Exit","weight":1},{"from":"A","to":"Gap","weight":1},)"
      R"({"from":"B","to":"Exit","weight":1},{"from":"Entry","to":"A","weight":2},)"
      R"({"from":"Gap","to":"B","weight":1}],"nodes":{"A":4,"B":1},)"
      R"("window":{"duration_days":35,"end":"2019-02-05","start":"2019-01-01"}})";
  if (to_json(g).dump() != want_json) return {false, "canonical JSON differs: " + to_json(g).dump()};

  const auto dot = emit_dot(g);
  const auto parsed = dotcheck::parse(dot);
  std::map<std::string, std::string> node_labels;
  for (const auto& [n, attrs] : parsed.nodes) node_labels[n] = attrs.count("label") ? attrs.at("label") : "";
  const std::map<std::string, std::string> want_labels{
      {"A", "A\\n4"}, {"B", "B\\n1"}, {"Entry", "Entry"}, {"Exit", "Exit"}, {"Gap", "Gap"}};
  if (node_labels != want_labels) return {false, "DOT node labels differ"};
  std::map<std::pair<std::string, std::string>, std::int64_t> dot_edges;
  for (const auto& [e, attrs] : parsed.edges) {
    if (!attrs.count("label")) return {false, "unlabeled DOT edge"};
    dot_edges[e] = std::stoll(attrs.at("label"));
  }
  if (dot_edges != want_edges || parsed.edges.size() != 5) return {false, "DOT edges differ"};
  if (emit_dot(g) != dot) return {false, "DOT output not stable"};
  const double s = seconds_since(t0);
  return {s < 1.0, fmt("%.3f s", s)};
}

// 2. Pipeline per-person statistics against planted truth.
Outcome oracle_equivalence() {
  const auto t0 = Clock::now();
  std::size_t persons = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    synth::GeneratorParams p;
    p.n_persons = 1000;
    p.seed = seed;
    p.p_move = 0.05 + 0.001 * static_cast<double>(seed % 100);
    p.p_multi = 0.02;
    p.p_overlap_record = 0.1;
    const auto gen = synth::generate_corpus(p);
    RunConfig cfg;
    const auto a = analyze_text(synth::to_csv(gen.records), cfg);
    if (a.corpus.persons.size() != gen.truth.size()) return {false, "person count mismatch, seed " + std::to_string(seed)};
    for (std::size_t i = 0; i < gen.truth.size(); ++i) {
      const auto& t = gen.truth[i];
      const auto& person = a.corpus.persons[i];
      const auto s = person_period_stats(person.days, cfg.gap, TransitionMode::direct);
      const auto seq_transitions =
          shelter_transition_count(extract_transitions(a.sequences[i]), TransitionMode::direct);
      if (person.person_id != t.person_id || s.transitions != t.transitions || seq_transitions != t.transitions ||
          s.unique_shelters != t.unique_shelters || s.tenure_days != t.tenure_days || s.stays != t.stays)
        return {false, "mismatch for " + t.person_id + ", seed " + std::to_string(seed)};
      ++persons;
    }
  }
  const double s = seconds_since(t0);
  return {s < 60.0, std::to_string(persons) + " persons, " + fmt("%.1f s", s)};
}

// 3. Flow conservation on random corpora.
Outcome conservation() {
  std::mt19937_64 rng(2024);
  const int cases = 10000;
  for (int i = 0; i < cases; ++i) {
    auto a = sft::analyze_records(sft::random_records(rng));
    const auto g = build_flow_graph(a.corpus, a.sequences, Window::over({sft::d0() - 1, sft::d0() + 200}));
    const auto n = static_cast<std::int64_t>(a.corpus.persons.size());
    if (g.out_weight(NodeId::entry()) != n || g.in_weight(NodeId::exit()) != n)
      return {false, "Entry/Exit weight differs from person count in case " + std::to_string(i)};
    for (auto node : {NodeId::gap(), NodeId::multiple()})
      if (g.in_weight(node) != g.out_weight(node)) return {false, "gateway imbalance in case " + std::to_string(i)};
    for (std::size_t s = 0; s < g.shelters.size(); ++s) {
      const auto id = NodeId::of(static_cast<ShelterId>(s));
      if (g.in_weight(id) != g.out_weight(id)) return {false, "shelter imbalance in case " + std::to_string(i)};
    }
  }
  return {true, std::to_string(cases) + " corpora"};
}

// 4. Cohort labels partition every random corpus.
Outcome cohort_partition() {
  std::mt19937_64 rng(4);
  const auto cfg = CohortConfig::published();
  sft::RandomCorpusSpec spec;
  spec.persons_max = 40;
  spec.day_span = 2300;
  std::size_t persons = 0;
  for (int i = 0; i < 2000; ++i) {
    auto records = sft::random_records(rng, spec);
    for (auto& r : records) r.start_date = Day::from_ymd(2017, 12, 1) + (r.start_date - sft::d0());
    const auto c = sft::corpus_of(records);
    std::vector<CohortLabel> labels;
    for (const auto& p : c.persons) {
      const unsigned m = cohort_predicates(p.first_day(), p.last_day(), cfg);
      const auto label = classify(p.first_day(), p.last_day(), cfg);
      if (std::popcount(m) > 1) return {false, "overlapping cohort predicates for " + p.person_id};
      if ((m == 0) != (label == CohortLabel::unclassified)) return {false, "label disagrees with predicates"};
      labels.push_back(label);
    }
    std::size_t sum = 0;
    for (const auto& [_, n] : cohort_census(labels)) sum += n;
    if (sum != c.persons.size()) return {false, "census does not sum to N"};
    persons += c.persons.size();
  }
  return {true, std::to_string(persons) + " persons over 2000 corpora"};
}

// 5. Summary statistics against a sort-based oracle.
Outcome summary_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 500), small(0, 30);
  std::uniform_real_distribution<double> real(0.0, 5000.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (auto& x : v) x = i % 2 ? real(rng) : small(rng);
    const auto want = sft::oracle_summary(v);
    const auto got = summarize(v);
    if (got.median != want.median || got.p95 != want.p95) return {false, "median/p95 mismatch in sample " + std::to_string(i)};
    if (std::abs(got.mean - want.mean) > 1e-9 * std::max(1.0, std::abs(want.mean)))
      return {false, "mean mismatch in sample " + std::to_string(i)};
  }
  return {true, "1000 samples"};
}

// 6. Transitions per interaction outside the shock window.
Outcome ratio_recovery() {
  synth::GeneratorParams p;
  p.n_persons = 10000;
  p.seed = 6;
  p.p_move = 0.10;
  p.shock.entry_multiplier = 0.5;
  p.shock.activity_multiplier = 0.7;
  RunConfig cfg;
  const auto a = analyze_text(synth::to_csv(synth::generate_corpus(p).records), cfg);
  const auto inter = daily_interactions(a.corpus, a.labels, p.span, std::nullopt, 1);
  const auto trans = daily_transitions(a.sequences, a.labels, p.span, std::nullopt, TransitionMode::direct, 1);
  const auto ratio = transition_ratio(trans, inter);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < ratio.size(); ++k) {
    const Day d = ratio.start + static_cast<std::int32_t>(k);
    if (p.shock.range.contains(d) || is_missing(ratio.values[k])) continue;
    sum += ratio.values[k];
    ++n;
  }
  const double mean = sum / static_cast<double>(n);
  return {mean >= 0.08 && mean <= 0.12, "mean daily ratio " + fmt("%.4f", mean) + " over " + std::to_string(n) + " days"};
}

// 7. Relative normalization of a scaled baseline.
Outcome relative_normalization() {
  synth::GeneratorParams p;
  p.n_persons = 2000;
  p.seed = 7;
  RunConfig cfg;
  const auto a = analyze_text(synth::to_csv(synth::generate_corpus(p).records), cfg);
  const auto base = to_rates(build_flow_graph(a.corpus, a.sequences, cfg.periods[0].window()));
  auto target = base;
  for (auto& [_, r] : target.node_rates) r *= 0.541;
  for (auto& [_, r] : target.edge_rates) r *= 0.541;
  const auto rel = normalize_relative(target, base);
  GraphStyleConfig style;
  style.min_labeled_rate = 0.0;
  const auto parsed = dotcheck::parse(emit_dot(rel, style));
  std::size_t checked = 0;
  for (const auto& [n, attrs] : parsed.nodes) {
    if (!rel.nodes.count(n)) continue;
    const auto& label = attrs.at("label");
    if (label.substr(label.find("\\n") + 2) != "54.1%") return {false, "node " + n + " labelled " + label};
    if (std::abs(*rel.nodes.at(n).percent - 54.1) > 1e-9) return {false, "node " + n + " percent off"};
    ++checked;
  }
  for (const auto& [e, attrs] : parsed.edges) {
    if (attrs.at("label") != "54.1%") return {false, "edge " + e.first + "->" + e.second + " labelled " + attrs.at("label")};
    ++checked;
  }
  if (format_percent(100.0 * 0.541, 1) != "54.1%") return {false, "exemplar arithmetic"};
  return {checked > 10, std::to_string(checked) + " nodes and edges at 54.1%"};
}

// 8. Published table values are documentation only; the fixtures must be
// internally consistent and the table must be computable at all.
Outcome documentation_fixtures() {
  const double total = 43263, before = 13654, stayed = 7986, during = 3874, after = 9672;
  const double stay_median_tenure = 123;
  bool ok = std::abs(100.0 * before / total - 31.6) < 0.05 && before + stayed + during + after < total &&
            stay_median_tenure > 0;
  synth::GeneratorParams p;
  p.n_persons = 500;
  RunConfig cfg;
  const auto a = analyze_text(synth::to_csv(synth::generate_corpus(p).records), cfg);
  const auto table = compute_stats_table(a.corpus, a.labels, cfg.periods, cfg.gap, cfg.transition_mode);
  ok = ok && table.columns.size() == 18;
  return {ok, "values recorded as fixtures, not reproduced (confidential source data)"};
}

std::map<std::string, std::string> full_run(const std::string& csv, const RunConfig& cfg) {
  const auto a = analyze_text(csv, cfg);
  Artifacts all;
  for (auto&& part : {validate_artifacts(a, cfg), sequence_artifacts(a, cfg), graph_artifacts(a, cfg),
                      timeline_artifacts(a, cfg), stats_artifacts(a, cfg), cohort_artifacts(a, cfg)})
    all.insert(part.begin(), part.end());
  return all;
}

// 9. Full pipeline at desk scale.
Outcome performance() {
  synth::GeneratorParams p;
  p.n_persons = 45000;
  p.seed = 9;
  const std::string csv = synth::to_csv(synth::generate_corpus(p).records);
  RunConfig cfg;
  cfg.timeline_mode = TransitionMode::direct;

  const auto t0 = Clock::now();
  const auto a = analyze_text(csv, cfg);
  const auto graphs = graph_artifacts(a, cfg);
  const auto stats = stats_artifacts(a, cfg);
  const auto timeline = timeline_artifacts(a, cfg);
  const double s = seconds_since(t0);

  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  const double peak_mb = static_cast<double>(ru.ru_maxrss) / 1024.0;
  const auto days = a.corpus.stats.person_shelter_days;
  const bool ok = s < 10.0 && peak_mb < 1024.0 && a.corpus.persons.size() == 45000 && days >= 2'500'000 &&
                  !graphs.empty() && !stats.empty() && !timeline.empty();
  return {ok, std::to_string(days) + " person-days, " + fmt("%.2f s", s) + ", peak RSS " + fmt("%.0f MB", peak_mb)};
}

// 10. Two end-to-end runs give identical artifacts.
Outcome determinism() {
  synth::GeneratorParams p;
  p.n_persons = 3000;
  p.seed = 10;
  RunConfig cfg;
  cfg.timeline_mode = TransitionMode::mobility;
  cfg.generator = p;
  const auto sim1 = simulate_artifacts(cfg), sim2 = simulate_artifacts(cfg);
  if (sim1 != sim2) return {false, "simulate output differs"};
  const auto r1 = full_run(sim1.at("records.csv"), cfg);
  const auto r2 = full_run(sim2.at("records.csv"), cfg);
  if (r1 != r2) return {false, "artifacts differ"};
  return {true, std::to_string(r1.size()) + " artifacts byte-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"fig1-golden", fig1_golden},
      {"oracle-equivalence", oracle_equivalence},
      {"conservation", conservation},
      {"cohort-partition", cohort_partition},
      {"summary-oracle", summary_oracle},
      {"ratio-recovery", ratio_recovery},
      {"relative-normalization", relative_normalization},
      {"documentation-fixtures", documentation_fixtures},
      {"performance", performance},
      {"determinism", determinism},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %-24s %s\n", o.pass ? "PASS" : "FAIL", ++index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
