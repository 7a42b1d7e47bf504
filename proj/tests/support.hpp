#pragma once

// Test helpers: a small random record generator that does not share code with
// synth::Generator, and brute-force oracles written against plain containers.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "shelterflow.hpp"

namespace sft {

using namespace shelterflow;

inline Day d0() { return Day::from_ymd(2019, 1, 1); }

inline StayRecord rec(std::string person, int day, std::string shelter, int duration = 1) {
  return {std::move(person), d0() + day, std::move(shelter), duration};
}

inline Corpus corpus_of(const std::vector<StayRecord>& records) { return expand_to_interaction_days(records); }

// The two-person worked example: P1 at A for one day; P2 at A for three days,
// then at B 31 days after the last A day.
inline std::vector<StayRecord> fig1_records() {
  return {rec("P1", 0, "A", 1), rec("P2", 0, "A", 3), rec("P2", 33, "B", 1)};
}

inline const char* kFig1Csv =
    "person_id,start_date,shelter_id,duration_days\n"
    "P1,2018-04-01,A,1\n"
    "P2,2018-04-01,A,3\n"
    "P2,2018-05-04,B,1\n";

struct RandomCorpusSpec {
  int persons_max = 8;
  int records_max = 6;
  int shelters = 4;
  int day_span = 120;
  int duration_max = 6;
};

// Records with overlaps, same-day multi-shelter use and long absences.
inline std::vector<StayRecord> random_records(std::mt19937_64& rng, const RandomCorpusSpec& spec = {}) {
  std::uniform_int_distribution<int> n_persons(0, spec.persons_max);
  std::uniform_int_distribution<int> n_records(1, spec.records_max);
  std::uniform_int_distribution<int> shelter(0, spec.shelters - 1);
  std::uniform_int_distribution<int> day(0, spec.day_span);
  std::uniform_int_distribution<int> duration(1, spec.duration_max);
  std::vector<StayRecord> out;
  const int np = n_persons(rng);
  for (int p = 0; p < np; ++p) {
    const int nr = n_records(rng);
    for (int r = 0; r < nr; ++r)
      out.push_back(rec("p" + std::to_string(p), day(rng), "S" + std::to_string(shelter(rng)), duration(rng)));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// person -> day serial -> shelter names
using DayMap = std::map<std::string, std::map<int, std::set<std::string>>>;

inline DayMap oracle_days(const std::vector<StayRecord>& records) {
  DayMap m;
  for (const auto& r : records)
    for (int k = 0; k < r.duration_days; ++k) m[r.person_id][(r.start_date + k).serial()].insert(r.shelter_id);
  return m;
}

using NamedTransition = std::tuple<std::string, std::string, int>;  // from, to, event day serial

inline std::string oracle_location(const std::set<std::string>& shelters) {
  return shelters.size() == 1 ? *shelters.begin() : "Multiple";
}

// Walks every calendar day from the first to the last active day and emits
// a transition whenever the location changes or an absence becomes a gap.
inline std::vector<NamedTransition> oracle_transitions(const std::map<int, std::set<std::string>>& days,
                                                       int threshold, bool inclusive = false) {
  std::vector<NamedTransition> out;
  if (days.empty()) return out;
  const int first = days.begin()->first, last = days.rbegin()->first;
  std::string where;
  int last_active = first;
  for (int d = first; d <= last; ++d) {
    auto it = days.find(d);
    if (it == days.end()) continue;
    const std::string loc = oracle_location(it->second);
    if (d == first) {
      out.emplace_back("Entry", loc, d);
    } else {
      const int absence = d - last_active;
      const bool gap = inclusive ? absence >= threshold : absence > threshold;
      if (gap) {
        out.emplace_back(where, "Gap", last_active + 1);
        out.emplace_back("Gap", loc, d);
      } else if (loc != where) {
        out.emplace_back(where, loc, d);
      }
    }
    where = loc;
    last_active = d;
  }
  out.emplace_back(where, "Exit", last + 1);
  return out;
}

inline std::vector<NamedTransition> named(const std::vector<Transition>& ts, const std::vector<std::string>& shelters) {
  std::vector<NamedTransition> out;
  for (const auto& t : ts) out.emplace_back(node_name(t.from, shelters), node_name(t.to, shelters), t.event_date.serial());
  return out;
}

inline bool is_direct(const NamedTransition& t) {
  auto gateway = [](const std::string& n) { return n == "Entry" || n == "Exit" || n == "Gap" || n == "Multiple"; };
  return !gateway(std::get<0>(t)) && !gateway(std::get<1>(t)) && std::get<0>(t) != std::get<1>(t);
}

struct Analyzed {
  Corpus corpus;
  std::vector<LocationSequence> sequences;
  std::vector<CohortLabel> labels;
};

inline Analyzed analyze_records(const std::vector<StayRecord>& records, const GapRule& rule = {},
                                const CohortConfig& cohorts = CohortConfig::published()) {
  Analyzed a{corpus_of(records), {}, {}};
  for (const auto& p : a.corpus.persons) {
    a.sequences.push_back(build_location_sequence(p, rule));
    a.labels.push_back(classify(p.first_day(), p.last_day(), cohorts));
  }
  return a;
}

// Sort-based reference statistics.
struct OracleSummary {
  double median, mean, p95;
};

inline OracleSummary oracle_summary(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  long double sum = 0;
  for (double x : v) sum += x;
  const double median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  std::size_t rank = 1;
  while (rank * 100 < 95 * n) ++rank;  // smallest rank with rank/n >= 0.95
  return {median, static_cast<double>(sum / n), v[rank - 1]};
}

}  // namespace sft
