#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/ingest.hpp"

namespace shelterflow {

enum class NodeKind : std::uint8_t { shelter, entry, exit, gap, multiple };

// A graph location: a shelter, or one of the four gateway nodes.
struct NodeId {
  NodeKind kind = NodeKind::shelter;
  ShelterId shelter{};  // meaningful only for NodeKind::shelter

  static constexpr NodeId of(ShelterId s) { return {NodeKind::shelter, s}; }
  static constexpr NodeId entry() { return {NodeKind::entry, {}}; }
  static constexpr NodeId exit() { return {NodeKind::exit, {}}; }
  static constexpr NodeId gap() { return {NodeKind::gap, {}}; }
  static constexpr NodeId multiple() { return {NodeKind::multiple, {}}; }

  constexpr bool is_shelter() const { return kind == NodeKind::shelter; }
  constexpr bool is_gateway() const { return kind != NodeKind::shelter; }

  friend constexpr bool operator==(const NodeId&, const NodeId&) = default;
  friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline std::string node_name(NodeId n, const std::vector<std::string>& shelters) {
  switch (n.kind) {
    case NodeKind::shelter: return shelters.at(index(n.shelter));
    case NodeKind::entry: return "Entry";
    case NodeKind::exit: return "Exit";
    case NodeKind::gap: return "Gap";
    case NodeKind::multiple: return "Multiple";
  }
  return "?";
}

// Which absence lengths count as leaving the system. The absence length is
// next.first_day - prev.last_day, so a return "31 days later" is 31.
enum class GapComparison { greater, greater_equal };

struct GapRule {
  std::int32_t threshold_days = 30;
  GapComparison comparison = GapComparison::greater;

  static GapRule never() { return {std::numeric_limits<std::int32_t>::max(), GapComparison::greater}; }

  bool is_gap(std::int32_t days_between) const {
    return comparison == GapComparison::greater ? days_between > threshold_days
                                                : days_between >= threshold_days;
  }
};

inline NodeId locate_day(const InteractionDay& day) {
  if (day.shelters.empty()) throw InvariantError("interaction day with no shelters");
  return day.shelters.size() == 1 ? NodeId::of(day.shelters.front()) : NodeId::multiple();
}

// A maximal stretch at one location. Short absences (not gaps) inside a run
// at the same location are absorbed, so not every day in
// [first_day, last_day] need be active; first_day and last_day always are.
struct LocationSegment {
  NodeId location;
  Day first_day;
  Day last_day;
  std::int32_t active_days = 0;
  std::int64_t interactions = 0;

  friend bool operator==(const LocationSegment&, const LocationSegment&) = default;
};

struct LocationSequence {
  std::string person_id;
  std::vector<LocationSegment> segments;
  std::vector<bool> gap_flags;  // gap_flags[i] sits between segments[i] and segments[i+1]

  std::size_t gap_count() const {
    std::size_t n = 0;
    for (bool g : gap_flags) n += g;
    return n;
  }
  std::int64_t interactions() const {
    std::int64_t n = 0;
    for (const auto& s : segments) n += s.interactions;
    return n;
  }
  Day first_day() const { return segments.front().first_day; }
  Day last_day() const { return segments.back().last_day; }

  friend bool operator==(const LocationSequence&, const LocationSequence&) = default;
};

inline LocationSequence build_location_sequence(std::span<const InteractionDay> days,
                                                const GapRule& rule = {},
                                                std::string person_id = {}) {
  if (days.empty()) throw InvariantError("person '" + person_id + "' has no interaction days");
  if (rule.threshold_days < 1) throw ConfigError("gap threshold must be at least 1 day");

  LocationSequence seq;
  seq.person_id = std::move(person_id);
  for (const auto& day : days) {
    const NodeId loc = locate_day(day);
    const auto n = static_cast<std::int64_t>(day.shelters.size());
    if (!seq.segments.empty()) {
      auto& cur = seq.segments.back();
      if (!(cur.last_day < day.date))
        throw InvariantError("interaction days for '" + seq.person_id + "' are not strictly ascending");
      const bool gap = rule.is_gap(day.date - cur.last_day);
      if (!gap && loc == cur.location) {
        cur.last_day = day.date;
        ++cur.active_days;
        cur.interactions += n;
        continue;
      }
      seq.gap_flags.push_back(gap);
    }
    seq.segments.push_back({loc, day.date, day.date, 1, n});
  }
  return seq;
}

inline LocationSequence build_location_sequence(const PersonDays& person, const GapRule& rule = {}) {
  return build_location_sequence(person.days, rule, person.person_id);
}

inline nlohmann::json to_json(const LocationSequence& seq, const std::vector<std::string>& shelters) {
  nlohmann::json segs = nlohmann::json::array();
  for (std::size_t i = 0; i < seq.segments.size(); ++i) {
    const auto& s = seq.segments[i];
    nlohmann::json j = {{"location", node_name(s.location, shelters)},
                        {"first_day", s.first_day.iso()},
                        {"last_day", s.last_day.iso()},
                        {"active_days", s.active_days},
                        {"interactions", s.interactions}};
    if (i + 1 < seq.segments.size()) j["gap_after"] = static_cast<bool>(seq.gap_flags[i]);
    segs.push_back(std::move(j));
  }
  return {{"person_id", seq.person_id}, {"segments", segs}};
}

}  // namespace shelterflow
