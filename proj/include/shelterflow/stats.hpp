#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shelterflow/cohorts.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/flowgraph.hpp"
#include "shelterflow/format.hpp"
#include "shelterflow/ingest.hpp"
#include "shelterflow/journeys.hpp"

namespace shelterflow {

// A named era. The normalization length may differ from the calendar length
// when reproducing published per-day rates.
struct Period {
  std::string name;
  DateRange range;
  std::optional<std::int32_t> duration_override;

  std::int32_t calendar_days() const { return range.length(); }
  std::int32_t duration_days() const { return duration_override.value_or(range.length()); }
  Window window() const { return Window::over(range, duration_override); }
};

inline std::span<const InteractionDay> clip_to_period(std::span<const InteractionDay> days,
                                                      const DateRange& range) {
  auto lo = std::lower_bound(days.begin(), days.end(), range.start,
                             [](const InteractionDay& d, Day x) { return d.date < x; });
  auto hi = std::lower_bound(lo, days.end(), range.end,
                             [](const InteractionDay& d, Day x) { return d.date < x; });
  return {lo, hi};
}

inline std::span<const InteractionDay> clip_to_period(std::span<const InteractionDay> days,
                                                      const Period& period) {
  return clip_to_period(days, period.range);
}

struct PersonPeriodStats {
  std::int32_t tenure_days = 0;
  std::int64_t stays = 0;
  double use_percent = 0.0;  // not capped: same-day multi-shelter use can exceed 100
  std::int32_t unique_shelters = 0;
  std::int64_t transitions = 0;

  friend bool operator==(const PersonPeriodStats&, const PersonPeriodStats&) = default;
};

// Segmentation is re-run on the clipped days, so a gap that straddles the
// period boundary never surfaces as a transition inside the period.
inline PersonPeriodStats person_period_stats(std::span<const InteractionDay> days,
                                             const GapRule& rule = {},
                                             TransitionMode mode = TransitionMode::direct) {
  if (days.empty()) throw InvariantError("person_period_stats called with no days");
  PersonPeriodStats s;
  s.tenure_days = (days.back().date - days.front().date) + 1;
  std::vector<ShelterId> seen;
  for (const auto& d : days) {
    s.stays += static_cast<std::int64_t>(d.shelters.size());
    seen.insert(seen.end(), d.shelters.begin(), d.shelters.end());
  }
  std::sort(seen.begin(), seen.end());
  s.unique_shelters = static_cast<std::int32_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
  s.use_percent = 100.0 * static_cast<double>(s.stays) / static_cast<double>(s.tenure_days);
  const auto seq = build_location_sequence(days, rule);
  s.transitions = shelter_transition_count(extract_transitions(seq), mode);
  return s;
}

struct Summary {
  double median = 0.0;
  double mean = 0.0;
  double p95 = 0.0;
};

// median: mean of the two central order statistics for even n.
// p95: nearest rank, the ceil(0.95 n)-th order statistic.
inline Summary summarize(std::vector<double> values) {
  if (values.empty()) throw InputError("no persons in period");
  const std::size_t n = values.size();
  Summary s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(n);

  const std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n), exact in integers
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  s.p95 = values[rank - 1];

  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) {
    s.median = upper;
  } else {
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    s.median = (lower + upper) / 2.0;
  }
  return s;
}

enum class Metric { tenure_days, stays, use_percent, unique_shelters, transitions };

inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::tenure_days, Metric::stays,
                                                      Metric::use_percent, Metric::unique_shelters,
                                                      Metric::transitions};

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::tenure_days: return "tenure_days";
    case Metric::stays: return "stays";
    case Metric::use_percent: return "use_percent";
    case Metric::unique_shelters: return "unique_shelters";
    case Metric::transitions: return "transitions";
  }
  return "?";
}

inline double metric_value(const PersonPeriodStats& s, Metric m) {
  switch (m) {
    case Metric::tenure_days: return s.tenure_days;
    case Metric::stays: return static_cast<double>(s.stays);
    case Metric::use_percent: return s.use_percent;
    case Metric::unique_shelters: return s.unique_shelters;
    case Metric::transitions: return static_cast<double>(s.transitions);
  }
  return 0.0;
}

struct StatsSummary {
  std::size_t n = 0;
  std::array<Summary, kAllMetrics.size()> metrics{};

  const Summary& operator[](Metric m) const { return metrics[static_cast<std::size_t>(m)]; }
};

inline StatsSummary summarize(std::span<const PersonPeriodStats> samples) {
  if (samples.empty()) throw InputError("no persons in period");
  StatsSummary out;
  out.n = samples.size();
  std::vector<double> values(samples.size());
  for (auto m : kAllMetrics) {
    for (std::size_t i = 0; i < samples.size(); ++i) values[i] = metric_value(samples[i], m);
    out.metrics[static_cast<std::size_t>(m)] = summarize(values);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Period x cohort matrix

struct StatsColumn {
  std::string period;
  std::string cohort;  // a CohortLabel name, or "All"
  std::int32_t duration_days = 0;
  std::optional<StatsSummary> summary;  // empty when no person of the cohort used the period
};

struct StatsTable {
  std::vector<StatsColumn> columns;
};

// labels[i] is the cohort of corpus.persons[i].
inline StatsTable compute_stats_table(const Corpus& corpus, std::span<const CohortLabel> labels,
                                      std::span<const Period> periods, const GapRule& rule,
                                      TransitionMode mode = TransitionMode::direct) {
  if (labels.size() != corpus.persons.size())
    throw InvariantError("label count does not match person count");
  StatsTable table;
  bool any_person = false;
  for (const auto& period : periods) {
    std::array<std::vector<PersonPeriodStats>, kAllCohorts.size()> by_cohort;
    std::vector<PersonPeriodStats> all;
    for (std::size_t i = 0; i < corpus.persons.size(); ++i) {
      auto clipped = clip_to_period(corpus.persons[i].days, period);
      if (clipped.empty()) continue;
      auto s = person_period_stats(clipped, rule, mode);
      by_cohort[static_cast<std::size_t>(labels[i])].push_back(s);
      all.push_back(s);
    }
    any_person = any_person || !all.empty();
    for (auto c : kAllCohorts) {
      const auto& sample = by_cohort[static_cast<std::size_t>(c)];
      StatsColumn col{period.name, to_string(c), period.duration_days(), std::nullopt};
      if (!sample.empty()) col.summary = summarize(sample);
      table.columns.push_back(std::move(col));
    }
    StatsColumn col{period.name, "All", period.duration_days(), std::nullopt};
    if (!all.empty()) col.summary = summarize(all);
    table.columns.push_back(std::move(col));
  }
  if (!any_person) throw InputError("no persons in period");
  return table;
}

inline constexpr std::array<std::pair<const char*, double Summary::*>, 3> kSummaryFields = {{
    {"median", &Summary::median}, {"mean", &Summary::mean}, {"p95", &Summary::p95}}};

inline std::string to_csv(const StatsTable& t) {
  std::ostringstream os;
  os << "metric,statistic";
  for (const auto& c : t.columns) os << ',' << c.period << '/' << c.cohort;
  os << '\n';
  os << "period_duration_days,value";
  for (const auto& c : t.columns) os << ',' << c.duration_days;
  os << '\n';
  os << "persons,count";
  for (const auto& c : t.columns) os << ',' << (c.summary ? c.summary->n : 0);
  os << '\n';
  for (auto m : kAllMetrics) {
    for (auto [stat, field] : kSummaryFields) {
      os << to_string(m) << ',' << stat;
      for (const auto& c : t.columns) {
        os << ',';
        if (c.summary) os << format_number((*c.summary)[m].*field);
      }
      os << '\n';
    }
  }
  return os.str();
}

inline nlohmann::json to_json(const StatsTable& t) {
  using nlohmann::json;
  json cols = json::array();
  for (const auto& c : t.columns) {
    json metrics = nullptr;
    if (c.summary) {
      metrics = json::object();
      for (auto m : kAllMetrics) {
        const auto& s = (*c.summary)[m];
        metrics[to_string(m)] = {{"median", s.median}, {"mean", s.mean}, {"p95", s.p95}};
      }
    }
    cols.push_back({{"period", c.period},
                    {"cohort", c.cohort},
                    {"duration_days", c.duration_days},
                    {"persons", c.summary ? c.summary->n : 0},
                    {"metrics", metrics}});
  }
  return {{"columns", cols},
          {"notes", "use_percent = 100 * stays / tenure_days, uncapped (may exceed 100)"}};
}

}  // namespace shelterflow
