#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "shelterflow/cohorts.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/flowgraph.hpp"
#include "shelterflow/ingest.hpp"
#include "shelterflow/journeys.hpp"
#include "shelterflow/stats.hpp"

namespace shelterflow {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// One value per calendar day starting at `start`; NaN marks a missing value.
struct DailySeries {
  Day start;
  std::vector<double> values;
  std::string label;

  DateRange range() const { return {start, start + static_cast<std::int32_t>(values.size())}; }
  std::size_t size() const { return values.size(); }
  double at(Day d) const { return values.at(static_cast<std::size_t>(d - start)); }

  double sum() const {
    double s = 0.0;
    for (double v : values)
      if (!is_missing(v)) s += v;
    return s;
  }
};

// Centered moving average. Near the ends the window is truncated to the days
// that exist; missing values are skipped. window == 1 is the identity.
inline std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1) throw ConfigError("smoothing window must be >= 1");
  if (window == 1) return {values.begin(), values.end()};
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  const std::ptrdiff_t back = window / 2;
  const std::ptrdiff_t fwd = window - 1 - back;
  std::vector<double> out(values.size(), kMissing);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - back); j <= std::min(n - 1, i + fwd); ++j) {
      if (is_missing(values[j])) continue;
      sum += values[j];
      ++count;
    }
    if (count > 0) out[i] = sum / count;
  }
  return out;
}

namespace detail {

inline bool cohort_matches(std::span<const CohortLabel> labels, std::size_t person,
                           std::optional<CohortLabel> filter) {
  if (!filter) return true;
  if (labels.size() <= person) throw InvariantError("cohort filter requires a label per person");
  return labels[person] == *filter;
}

inline std::string series_label(const char* metric, std::optional<CohortLabel> filter) {
  return std::string(metric) + ":" + (filter ? to_string(*filter) : "All");
}

}  // namespace detail

// Person-shelter-days per day. This counts a person once per shelter used,
// so it exceeds a head count on multi-shelter days.
inline DailySeries daily_interactions(const Corpus& corpus, std::span<const CohortLabel> labels,
                                      const DateRange& range, std::optional<CohortLabel> filter = {},
                                      int smoothing_window = 7) {
  if (range.empty()) throw ConfigError("timeline range is empty");
  std::vector<double> raw(static_cast<std::size_t>(range.length()), 0.0);
  for (std::size_t i = 0; i < corpus.persons.size(); ++i) {
    if (!detail::cohort_matches(labels, i, filter)) continue;
    for (const auto& d : clip_to_period(corpus.persons[i].days, range))
      raw[static_cast<std::size_t>(d.date - range.start)] += static_cast<double>(d.shelters.size());
  }
  return {range.start, moving_average(raw, smoothing_window), detail::series_label("interactions", filter)};
}

// Qualifying transitions per day, dated by Transition::event_date.
inline DailySeries daily_transitions(std::span<const LocationSequence> sequences,
                                     std::span<const CohortLabel> labels, const DateRange& range,
                                     std::optional<CohortLabel> filter, TransitionMode mode,
                                     int smoothing_window = 7) {
  if (range.empty()) throw ConfigError("timeline range is empty");
  std::vector<double> raw(static_cast<std::size_t>(range.length()), 0.0);
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    if (!detail::cohort_matches(labels, i, filter)) continue;
    for (const auto& t : extract_transitions(sequences[i]))
      if (range.contains(t.event_date) && is_shelter_transition(t.from, t.to, mode))
        raw[static_cast<std::size_t>(t.event_date - range.start)] += 1.0;
  }
  std::string label = detail::series_label("transitions", filter) + ":" + to_string(mode);
  return {range.start, moving_average(raw, smoothing_window), std::move(label)};
}

// Pointwise transitions / interactions; 0/0 days are missing, not zero.
inline DailySeries transition_ratio(const DailySeries& transitions, const DailySeries& interactions) {
  if (transitions.start != interactions.start || transitions.size() != interactions.size())
    throw InvariantError("transition_ratio: series ranges are not aligned");
  DailySeries out{transitions.start, std::vector<double>(transitions.size(), kMissing), "ratio"};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double t = transitions.values[i], n = interactions.values[i];
    if (is_missing(t) || is_missing(n) || n == 0.0) continue;
    out.values[i] = t / n;
  }
  auto colon = transitions.label.find(':');
  out.label = "ratio" + (colon == std::string::npos ? std::string() : transitions.label.substr(colon));
  return out;
}

// Average of the non-missing values on days inside `range`.
inline std::optional<double> mean_over(const DailySeries& s, const DateRange& range) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Day d = s.start + static_cast<std::int32_t>(i);
    if (!range.contains(d) || is_missing(s.values[i])) continue;
    sum += s.values[i];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

// Long format: date,value,label. Missing values are written as NA.
inline std::string to_csv(std::span<const DailySeries> series) {
  std::ostringstream os;
  os << "date,value,label\n";
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      os << (s.start + static_cast<std::int32_t>(i)).iso() << ',';
      if (is_missing(s.values[i])) os << "NA";
      else os << format_number(s.values[i]);
      os << ',' << s.label << '\n';
    }
  }
  return os.str();
}

}  // namespace shelterflow
