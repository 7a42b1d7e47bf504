#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "shelterflow/cohorts.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"
#include "shelterflow/format.hpp"
#include "shelterflow/ingest.hpp"
#include "shelterflow/journeys.hpp"

namespace shelterflow::synth {

// Inclusive integer range, sampled uniformly.
struct IntRange {
  std::int32_t lo = 0;
  std::int32_t hi = 0;
};

enum class Archetype { transient, episodic, chronic };

inline const char* to_string(Archetype a) {
  switch (a) {
    case Archetype::transient: return "transient";
    case Archetype::episodic: return "episodic";
    case Archetype::chronic: return "chronic";
  }
  return "?";
}

struct ArchetypeParams {
  double proportion = 0.0;
  IntRange episodes{1, 1};
  IntRange active_days{1, 1};  // active days per episode
  IntRange gap_days{31, 365};  // first_day(next) - last_day(prev) between episodes
  double attendance = 1.0;     // chance a day inside an episode is active
};

struct ShelterSpec {
  std::string name;
  double popularity = 1.0;
};

struct Shock {
  DateRange range{Day::from_ymd(2020, 3, 17), Day::from_ymd(2021, 7, 2)};
  double entry_multiplier = 1.0;
  double activity_multiplier = 1.0;
};

struct GeneratorParams {
  std::int64_t n_persons = 1000;
  std::vector<ShelterSpec> shelters = {
      {"Adult Shelter 1", 30}, {"Adult Shelter 2", 20}, {"Adult Shelter 3", 15},
      {"Adult Shelter 4", 10}, {"Family Shelter 1", 8}, {"Family Shelter 2", 7},
      {"Seniors Shelter", 5}};
  ArchetypeParams transient{0.55, {1, 1}, {1, 10}, {31, 365}, 0.9};
  ArchetypeParams episodic{0.33, {2, 6}, {2, 30}, {31, 400}, 0.6};
  ArchetypeParams chronic{0.12, {1, 2}, {100, 500}, {31, 200}, 0.85};
  double p_move = 0.05;
  double p_multi = 0.01;
  double p_overlap_record = 0.05;  // emit a run as two overlapping records
  DateRange span{Day::from_ymd(2018, 3, 1), Day::from_ymd(2023, 5, 2)};
  Shock shock;
  GapRule gap_rule;
  CohortConfig cohorts = CohortConfig::published();
  std::uint64_t seed = 42;

  const ArchetypeParams& archetype(Archetype a) const {
    switch (a) {
      case Archetype::transient: return transient;
      case Archetype::episodic: return episodic;
      case Archetype::chronic: return chronic;
    }
    return transient;
  }

  void validate() const {
    auto prob = [](double p, const char* what) {
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("generator: ") + what + " must be in [0,1]");
    };
    auto range = [](IntRange r, std::int32_t min, const char* what) {
      if (r.lo < min || r.hi < r.lo)
        throw ConfigError(std::string("generator: bad range for ") + what);
    };
    if (n_persons < 0) throw ConfigError("generator: n_persons must be >= 0");
    if (shelters.empty()) throw ConfigError("generator: at least one shelter is required");
    for (const auto& s : shelters) {
      if (s.name.empty() || is_reserved_node_name(s.name))
        throw ConfigError("generator: invalid shelter name '" + s.name + "'");
      if (!(s.popularity > 0.0)) throw ConfigError("generator: shelter popularity must be positive");
    }
    for (std::size_t i = 0; i < shelters.size(); ++i)
      for (std::size_t j = i + 1; j < shelters.size(); ++j)
        if (shelters[i].name == shelters[j].name)
          throw ConfigError("generator: duplicate shelter name '" + shelters[i].name + "'");
    double total = 0.0;
    for (auto a : {Archetype::transient, Archetype::episodic, Archetype::chronic}) {
      const auto& p = archetype(a);
      if (p.proportion < 0.0) throw ConfigError("generator: archetype proportion must be >= 0");
      total += p.proportion;
      range(p.episodes, 1, "episodes");
      range(p.active_days, 1, "active_days");
      range(p.gap_days, 1, "gap_days");
      if (!gap_rule.is_gap(p.gap_days.lo))
        throw ConfigError("generator: gap_days.lo does not exceed the gap threshold");
      prob(p.attendance, "attendance");
      if (p.attendance == 0.0) throw ConfigError("generator: attendance must be positive");
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("generator: archetype proportions must sum to 1");
    prob(p_move, "p_move");
    prob(p_multi, "p_multi");
    prob(p_overlap_record, "p_overlap_record");
    prob(shock.entry_multiplier, "shock.entry_multiplier");
    prob(shock.activity_multiplier, "shock.activity_multiplier");
    if (shock.activity_multiplier == 0.0) throw ConfigError("generator: activity multiplier must be positive");
    if (span.empty()) throw ConfigError("generator: empty date span");
    if (gap_rule.is_gap(1)) throw ConfigError("generator: gap rule treats consecutive days as a gap");
    if (p_move > 0.0 && shelters.size() < 2) throw ConfigError("generator: p_move > 0 needs two shelters");
    if (p_multi > 0.0 && shelters.size() < 2) throw ConfigError("generator: p_multi > 0 needs two shelters");
  }
};

struct PersonTruth {
  std::string person_id;
  Archetype archetype{};
  CohortLabel cohort{};
  Day first_day;
  Day last_day;
  std::int64_t transitions = 0;  // direct shelter-to-shelter
  std::int32_t unique_shelters = 0;
  std::int32_t tenure_days = 0;
  std::int64_t stays = 0;
};

struct GeneratedCorpus {
  std::vector<StayRecord> records;
  std::vector<PersonTruth> truth;  // ascending person_id
};

// Cohort lookup by first-day and last-day bands; written as a table so it
// does not share code with classify().
inline CohortLabel planted_cohort(Day first, Day last, const CohortConfig& cfg) {
  enum { f_censored, f_pre, f_during, f_after };
  enum { l_pre, l_lockdown_start, l_mid, l_censored };
  const Day after_floor = std::max(cfg.during_entry_ceiling(), cfg.lockdown_end - cfg.exclusion_days);
  int fb = first < cfg.start_floor()               ? f_censored
           : first < cfg.lockdown_start            ? f_pre
           : first < cfg.during_entry_ceiling()    ? f_during
           : first >= after_floor                  ? f_after
                                                   : f_censored;
  int lb = last < cfg.lockdown_start       ? l_pre
           : last < cfg.stayed_end_floor() ? l_lockdown_start
           : last < cfg.end_ceiling()      ? l_mid
                                           : l_censored;
  static constexpr CohortLabel U = CohortLabel::unclassified;
  static constexpr CohortLabel table[4][4] = {
      /* f_censored */ {U, U, U, U},
      /* f_pre      */ {CohortLabel::before, U, CohortLabel::stayed, U},
      /* f_during   */ {U, CohortLabel::during, CohortLabel::during, U},
      /* f_after    */ {U, CohortLabel::after, CohortLabel::after, U},
  };
  return table[fb][lb];
}

inline std::string person_name(std::int64_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "P%07lld", static_cast<long long>(i));
  return buf;
}

class Generator {
 public:
  explicit Generator(GeneratorParams params) : p_(std::move(params)), rng_(p_.seed) {
    p_.validate();
    std::vector<double> w;
    for (const auto& s : p_.shelters) w.push_back(s.popularity);
    pick_shelter_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    pick_archetype_ = std::discrete_distribution<int>(
        {p_.transient.proportion, p_.episodic.proportion, p_.chronic.proportion});
  }

  GeneratedCorpus run() {
    GeneratedCorpus out;
    out.truth.reserve(static_cast<std::size_t>(p_.n_persons));
    for (std::int64_t i = 0; i < p_.n_persons; ++i) generate_person(i, out);
    return out;
  }

 private:
  struct PlantedDay {
    Day date;
    std::vector<std::size_t> shelters;  // sorted
  };

  std::int32_t uniform(IntRange r) { return std::uniform_int_distribution<std::int32_t>(r.lo, r.hi)(rng_); }
  bool chance(double p) { return p > 0.0 && std::bernoulli_distribution(p)(rng_); }
  bool in_shock(Day d) const { return p_.shock.range.contains(d); }

  std::size_t other_shelter(std::size_t not_this) {
    for (;;) {
      auto s = pick_shelter_(rng_);
      if (s != not_this) return s;
    }
  }

  Day sample_entry_day() {
    const auto len = p_.span.length();
    for (;;) {
      Day d = p_.span.start + std::uniform_int_distribution<std::int32_t>(0, len - 1)(rng_);
      if (!in_shock(d) || chance(p_.shock.entry_multiplier)) return d;
    }
  }

  // Longest absence run (in days) that still counts as continued use.
  std::int32_t max_absence_run() const {
    std::int32_t k = 0;
    while (!p_.gap_rule.is_gap(k + 2) && k < 10000) ++k;
    return k;
  }

  void generate_person(std::int64_t index, GeneratedCorpus& out) {
    const auto archetype = static_cast<Archetype>(pick_archetype_(rng_));
    const auto& ap = p_.archetype(archetype);
    const Day end = p_.span.end;
    const std::int32_t absence_cap = max_absence_run();

    std::vector<PlantedDay> days;
    std::int64_t direct = 0;
    Day cursor = sample_entry_day();
    const int episodes = uniform(ap.episodes);
    for (int e = 0; e < episodes && cursor < end; ++e) {
      if (e > 0) {
        cursor = days.back().date + uniform(ap.gap_days);
        if (!(cursor < end)) break;
      }
      std::size_t home = pick_shelter_(rng_);
      bool have_prev = false;    // an earlier active day exists in this episode
      bool prev_single = false;  // ... and it was a single-shelter day
      std::int32_t active_left = uniform(ap.active_days);
      std::int32_t absent_run = 0;
      while (active_left > 0 && cursor < end) {
        if (have_prev && absent_run < absence_cap) {
          const double attend = ap.attendance * (in_shock(cursor) ? p_.shock.activity_multiplier : 1.0);
          if (!chance(attend)) {
            ++absent_run;
            ++cursor;
            continue;
          }
        }
        absent_run = 0;
        PlantedDay today{cursor, {}};
        if (chance(p_.p_multi)) {
          const auto other = other_shelter(home);
          today.shelters = {std::min(home, other), std::max(home, other)};
          prev_single = false;
        } else {
          if (have_prev && chance(p_.p_move)) {
            home = other_shelter(home);
            if (prev_single) ++direct;
          }
          today.shelters = {home};
          prev_single = true;
        }
        have_prev = true;
        days.push_back(std::move(today));
        --active_left;
        ++cursor;
      }
    }

    PersonTruth t;
    t.person_id = person_name(index);
    t.archetype = archetype;
    t.first_day = days.front().date;
    t.last_day = days.back().date;
    t.tenure_days = (t.last_day - t.first_day) + 1;
    t.transitions = direct;
    std::vector<std::size_t> used;
    for (const auto& d : days) {
      t.stays += static_cast<std::int64_t>(d.shelters.size());
      used.insert(used.end(), d.shelters.begin(), d.shelters.end());
    }
    std::sort(used.begin(), used.end());
    t.unique_shelters = static_cast<std::int32_t>(std::unique(used.begin(), used.end()) - used.begin());
    t.cohort = planted_cohort(t.first_day, t.last_day, p_.cohorts);
    lower(t.person_id, days, out.records);
    out.truth.push_back(std::move(t));
  }

  // One record per maximal run of consecutive days at a shelter; some runs
  // are split into two overlapping records.
  void lower(const std::string& person, const std::vector<PlantedDay>& days, std::vector<StayRecord>& out) {
    std::map<std::size_t, std::vector<Day>> by_shelter;
    for (const auto& d : days)
      for (auto s : d.shelters) by_shelter[s].push_back(d.date);
    std::vector<StayRecord> recs;
    for (const auto& [s, dates] : by_shelter) {
      std::size_t i = 0;
      while (i < dates.size()) {
        std::size_t j = i;
        while (j + 1 < dates.size() && dates[j + 1] == dates[j] + 1) ++j;
        const auto len = static_cast<std::int32_t>(j - i + 1);
        const auto& name = p_.shelters[s].name;
        if (len >= 2 && chance(p_.p_overlap_record)) {
          const std::int32_t cut = std::uniform_int_distribution<std::int32_t>(1, len - 1)(rng_);
          recs.push_back({person, dates[i], name, cut + 1});
          recs.push_back({person, dates[i] + cut, name, len - cut});
        } else {
          recs.push_back({person, dates[i], name, len});
        }
        i = j + 1;
      }
    }
    std::sort(recs.begin(), recs.end(), [](const StayRecord& a, const StayRecord& b) {
      return std::tie(a.start_date, a.shelter_id, a.duration_days) <
             std::tie(b.start_date, b.shelter_id, b.duration_days);
    });
    out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }

  GeneratorParams p_;
  std::mt19937_64 rng_;
  std::discrete_distribution<std::size_t> pick_shelter_;
  std::discrete_distribution<int> pick_archetype_;
};

inline GeneratedCorpus generate_corpus(const GeneratorParams& params) { return Generator(params).run(); }

inline std::string to_csv(const std::vector<StayRecord>& records) {
  std::string out = "person_id,start_date,shelter_id,duration_days\n";
  out.reserve(records.size() * 40);
  for (const auto& r : records) {
    out += csv_field(r.person_id);
    out += ',';
    out += r.start_date.iso();
    out += ',';
    out += csv_field(r.shelter_id);
    out += ',';
    out += std::to_string(r.duration_days);
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const IntRange& r) { return {r.lo, r.hi}; }

inline nlohmann::json to_json(const ArchetypeParams& a) {
  return {{"proportion", a.proportion},
          {"episodes", to_json(a.episodes)},
          {"active_days", to_json(a.active_days)},
          {"gap_days", to_json(a.gap_days)},
          {"attendance", a.attendance}};
}

inline nlohmann::json to_json(const GeneratorParams& p) {
  nlohmann::json shelters = nlohmann::json::array();
  for (const auto& s : p.shelters) shelters.push_back({{"name", s.name}, {"popularity", s.popularity}});
  return {{"n_persons", p.n_persons},
          {"shelters", shelters},
          {"archetypes",
           {{"transient", to_json(p.transient)},
            {"episodic", to_json(p.episodic)},
            {"chronic", to_json(p.chronic)}}},
          {"p_move", p.p_move},
          {"p_multi", p.p_multi},
          {"p_overlap_record", p.p_overlap_record},
          {"span", {{"start", p.span.start.iso()}, {"end", p.span.end.iso()}}},
          {"shock",
           {{"start", p.shock.range.start.iso()},
            {"end", p.shock.range.end.iso()},
            {"entry_multiplier", p.shock.entry_multiplier},
            {"activity_multiplier", p.shock.activity_multiplier}}},
          {"gap_threshold_days", p.gap_rule.threshold_days},
          {"seed", p.seed}};
}

inline nlohmann::json truth_to_json(const GeneratedCorpus& c, const GeneratorParams& p) {
  nlohmann::json persons = nlohmann::json::array();
  for (const auto& t : c.truth)
    persons.push_back({{"person_id", t.person_id},
                       {"archetype", to_string(t.archetype)},
                       {"cohort", to_string(t.cohort)},
                       {"first_day", t.first_day.iso()},
                       {"last_day", t.last_day.iso()},
                       {"transitions", t.transitions},
                       {"unique_shelters", t.unique_shelters},
                       {"tenure_days", t.tenure_days},
                       {"stays", t.stays}});
  return {{"params", to_json(p)}, {"persons", persons}};
}

}  // namespace shelterflow::synth
