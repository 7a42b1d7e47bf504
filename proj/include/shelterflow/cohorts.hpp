#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"

namespace shelterflow {

enum class CohortLabel : std::uint8_t { before, stayed, during, after, unclassified };

inline constexpr std::array<CohortLabel, 5> kAllCohorts = {
    CohortLabel::before, CohortLabel::stayed, CohortLabel::during, CohortLabel::after,
    CohortLabel::unclassified};

inline const char* to_string(CohortLabel c) {
  switch (c) {
    case CohortLabel::before: return "Before";
    case CohortLabel::stayed: return "Stayed";
    case CohortLabel::during: return "During";
    case CohortLabel::after: return "After";
    case CohortLabel::unclassified: return "Unclassified";
  }
  return "?";
}

inline std::optional<CohortLabel> cohort_from_string(std::string_view s) {
  for (auto c : kAllCohorts)
    if (s == to_string(c)) return c;
  return std::nullopt;
}

// Study dates plus the censoring margin. Each derived bound can be pinned
// explicitly; otherwise it is computed from the margin:
//   start_floor          = data_start + exclusion_days
//   end_ceiling          = data_end - exclusion_days
//   during_entry_ceiling = lockdown_end - exclusion_days
//   stayed_end_floor     = lockdown_start + exclusion_days
struct CohortConfig {
  Day data_start = Day::from_ymd(2018, 3, 1);
  Day data_end = Day::from_ymd(2023, 5, 1);
  Day lockdown_start = Day::from_ymd(2020, 3, 17);
  Day lockdown_end = Day::from_ymd(2021, 7, 1);
  std::int32_t exclusion_days = 30;

  std::optional<Day> start_floor_override;
  std::optional<Day> end_ceiling_override;
  std::optional<Day> during_entry_ceiling_override;
  std::optional<Day> stayed_end_floor_override;

  // The published cohort table states the Stayed exit window as opening on
  // 2020-03-31, which the margin formula does not produce; this preset pins it.
  static CohortConfig published() {
    CohortConfig c;
    c.stayed_end_floor_override = Day::from_ymd(2020, 3, 31);
    return c;
  }

  Day start_floor() const { return start_floor_override.value_or(data_start + exclusion_days); }
  Day end_ceiling() const { return end_ceiling_override.value_or(data_end - exclusion_days); }
  Day during_entry_ceiling() const {
    return during_entry_ceiling_override.value_or(lockdown_end - exclusion_days);
  }
  Day stayed_end_floor() const {
    return stayed_end_floor_override.value_or(lockdown_start + exclusion_days);
  }

  void validate() const {
    if (!(data_start < lockdown_start && lockdown_start < lockdown_end && lockdown_end < data_end))
      throw ConfigError("cohort dates must satisfy data_start < lockdown_start < lockdown_end < data_end");
    if (exclusion_days < 0) throw ConfigError("exclusion_days must be >= 0");
  }
};

enum CohortPredicate : unsigned {
  kPredBefore = 1u << 0,
  kPredStayed = 1u << 1,
  kPredDuring = 1u << 2,
  kPredAfter = 1u << 3,
};

// Bitmask of every cohort criterion the (first, last) pair satisfies.
// Intervals are half-open with inclusive lower bounds.
inline unsigned cohort_predicates(Day first, Day last, const CohortConfig& cfg) {
  const Day start_floor = cfg.start_floor();
  const Day end_ceiling = cfg.end_ceiling();
  const Day during_ceiling = cfg.during_entry_ceiling();
  const Day stayed_floor = cfg.stayed_end_floor();
  unsigned m = 0;
  if (first >= start_floor && last < cfg.lockdown_start) m |= kPredBefore;
  if (first >= start_floor && first < cfg.lockdown_start && last >= stayed_floor && last < end_ceiling)
    m |= kPredStayed;
  if (first >= cfg.lockdown_start && first < during_ceiling && last < end_ceiling) m |= kPredDuring;
  if (first >= during_ceiling && first >= cfg.lockdown_end - cfg.exclusion_days && last < end_ceiling)
    m |= kPredAfter;
  return m;
}

// First match in the order Before, Stayed, During, After.
inline CohortLabel classify(Day first, Day last, const CohortConfig& cfg) {
  if (last < first) throw InvariantError("classify: last day precedes first day");
  const unsigned m = cohort_predicates(first, last, cfg);
  if (m & kPredBefore) return CohortLabel::before;
  if (m & kPredStayed) return CohortLabel::stayed;
  if (m & kPredDuring) return CohortLabel::during;
  if (m & kPredAfter) return CohortLabel::after;
  return CohortLabel::unclassified;
}

using CohortCensus = std::map<CohortLabel, std::size_t>;

inline CohortCensus cohort_census(std::span<const CohortLabel> labels) {
  CohortCensus census;
  for (auto c : kAllCohorts) census[c] = 0;
  for (auto l : labels) ++census[l];
  return census;
}

inline nlohmann::json to_json(const CohortCensus& census) {
  std::size_t total = 0;
  for (const auto& [_, n] : census) total += n;
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [c, n] : census) counts[to_string(c)] = n;
  return {{"total", total}, {"counts", counts}};
}

inline nlohmann::json to_json(const CohortConfig& c) {
  return {{"data_start", c.data_start.iso()},
          {"data_end", c.data_end.iso()},
          {"lockdown_start", c.lockdown_start.iso()},
          {"lockdown_end", c.lockdown_end.iso()},
          {"exclusion_days", c.exclusion_days},
          {"start_floor", c.start_floor().iso()},
          {"end_ceiling", c.end_ceiling().iso()},
          {"during_entry_ceiling", c.during_entry_ceiling().iso()},
          {"stayed_end_floor", c.stayed_end_floor().iso()}};
}

}  // namespace shelterflow
