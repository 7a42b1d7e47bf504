#pragma once

#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shelterflow/date.hpp"
#include "shelterflow/error.hpp"

namespace shelterflow {

// One validated input row.
struct StayRecord {
  std::string person_id;
  Day start_date;
  std::string shelter_id;
  std::int32_t duration_days = 1;

  Day last_day() const { return start_date + (duration_days - 1); }
  friend bool operator==(const StayRecord&, const StayRecord&) = default;
};

struct SchemaConfig {
  std::string person_column = "person_id";
  std::string date_column = "start_date";
  std::string shelter_column = "shelter_id";
  std::string duration_column = "duration_days";
  char delimiter = '\0';  // '\0' sniffs ',' or '\t' from the header line
  DateFormat date_format = DateFormat::iso;
  Day min_date = Day::from_ymd(1990, 1, 1);
  Day max_date = Day::from_ymd(2100, 1, 1);
  std::int32_t max_duration_days = 36525;
};

enum class RejectReason {
  missing_fields,
  empty_person_id,
  empty_shelter_id,
  reserved_shelter_name,
  bad_date,
  date_out_of_range,
  bad_duration,
  nonpositive_duration,
  duration_too_large,
};

inline constexpr std::array<RejectReason, 9> kAllRejectReasons = {
    RejectReason::missing_fields,       RejectReason::empty_person_id,
    RejectReason::empty_shelter_id,     RejectReason::reserved_shelter_name,
    RejectReason::bad_date,             RejectReason::date_out_of_range,
    RejectReason::bad_duration,         RejectReason::nonpositive_duration,
    RejectReason::duration_too_large,
};

inline const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::missing_fields: return "missing_fields";
    case RejectReason::empty_person_id: return "empty_person_id";
    case RejectReason::empty_shelter_id: return "empty_shelter_id";
    case RejectReason::reserved_shelter_name: return "reserved_shelter_name";
    case RejectReason::bad_date: return "bad_date";
    case RejectReason::date_out_of_range: return "date_out_of_range";
    case RejectReason::bad_duration: return "bad_duration";
    case RejectReason::nonpositive_duration: return "nonpositive_duration";
    case RejectReason::duration_too_large: return "duration_too_large";
  }
  return "unknown";
}

// Gateway node names; a shelter may not reuse one of these.
inline bool is_reserved_node_name(std::string_view s) {
  return s == "Entry" || s == "Exit" || s == "Gap" || s == "Multiple";
}

struct RejectedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  RejectReason reason{};
};

struct IngestReport {
  std::size_t records_accepted = 0;
  std::size_t records_rejected = 0;
  std::map<std::string, std::size_t> rejection_reasons;
  std::vector<RejectedRow> rejection_examples;  // first few only
  std::size_t distinct_persons = 0;
  std::size_t distinct_shelters = 0;
  std::optional<DateRange> date_range;  // [first start day, last covered day + 1)

  // Filled after day expansion (see annotate_overlaps).
  std::size_t person_days = 0;
  std::size_t person_shelter_days = 0;
  std::size_t multi_shelter_days = 0;
  std::size_t duplicate_person_shelter_days = 0;

  std::size_t total_rows() const { return records_accepted + records_rejected; }

  static constexpr std::size_t kMaxExamples = 20;
};

inline nlohmann::json to_json(const IngestReport& r) {
  using nlohmann::json;
  json reasons = json::object();
  for (auto reason : kAllRejectReasons) reasons[to_string(reason)] = 0;
  for (const auto& [k, v] : r.rejection_reasons) reasons[k] = v;
  json examples = json::array();
  for (const auto& e : r.rejection_examples)
    examples.push_back({{"line", e.line}, {"reason", to_string(e.reason)}});
  json range = nullptr;
  if (r.date_range)
    range = {{"min", r.date_range->start.iso()}, {"max", (r.date_range->end - 1).iso()}};
  return {
      {"records_accepted", r.records_accepted},
      {"records_rejected", r.records_rejected},
      {"total_rows", r.total_rows()},
      {"rejection_reasons", reasons},
      {"rejection_examples", examples},
      {"distinct_persons", r.distinct_persons},
      {"distinct_shelters", r.distinct_shelters},
      {"date_range", range},
      {"overlaps",
       {{"person_days", r.person_days},
        {"person_shelter_days", r.person_shelter_days},
        {"multi_shelter_days", r.multi_shelter_days},
        {"duplicate_person_shelter_days", r.duplicate_person_shelter_days}}},
  };
}

struct ParseResult {
  std::vector<StayRecord> records;
  IngestReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits one delimited record starting at `pos`, honouring double-quoted
// fields (which may contain delimiters, doubled quotes and newlines).
// Advances `pos` past the record terminator.
class RowSplitter {
 public:
  RowSplitter(std::string_view text, char delim) : text_(text), delim_(delim) {}

  bool done() const { return pos_ >= text_.size(); }
  std::size_t line() const { return line_; }

  // Returns the line number the row started on.
  std::size_t next(std::vector<std::string>& fields) {
    fields.clear();
    std::size_t start_line = line_;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_++];
      if (quoted) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == '"' && !field_started) {
        quoted = true;
        field_started = true;
      } else if (c == delim_) {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
      } else if (c == '\n') {
        ++line_;
        break;
      } else if (c == '\r') {
        // swallowed; CRLF handled by the '\n' branch
      } else {
        field.push_back(c);
        if (c != ' ' && c != '\t') field_started = true;
      }
    }
    fields.push_back(std::move(field));
    return start_line;
  }

 private:
  std::string_view text_;
  char delim_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

inline char sniff_delimiter(std::string_view text) {
  auto eol = text.find('\n');
  auto header = text.substr(0, eol);
  auto tabs = std::count(header.begin(), header.end(), '\t');
  auto commas = std::count(header.begin(), header.end(), ',');
  return tabs > commas ? '\t' : ',';
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto* first = s.data();
  auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || p != last || first == last) return std::nullopt;
  return v;
}

}  // namespace detail

// Parses delimiter-separated text with a header row. Malformed rows are
// counted and skipped; a missing header column is fatal. Blank lines are
// ignored and do not count as rows.
inline ParseResult parse_records(std::string_view text, const SchemaConfig& schema = {}) {
  using detail::trim;
  ParseResult out;
  auto& report = out.report;

  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const char delim = schema.delimiter ? schema.delimiter : detail::sniff_delimiter(text);
  detail::RowSplitter rows(text, delim);

  std::vector<std::string> fields;
  // Header: skip leading blank lines.
  bool have_header = false;
  while (!rows.done()) {
    rows.next(fields);
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    have_header = true;
    break;
  }
  if (!have_header) throw InputError("input has no header row");

  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (trim(fields[i]) == name) return i;
    throw InputError("header is missing column '" + name + "'");
  };
  const std::size_t c_person = column(schema.person_column);
  const std::size_t c_date = column(schema.date_column);
  const std::size_t c_shelter = column(schema.shelter_column);
  const std::size_t c_duration = column(schema.duration_column);
  const std::size_t needed = std::max({c_person, c_date, c_shelter, c_duration}) + 1;

  std::unordered_map<std::string, std::uint8_t> persons_seen, shelters_seen;
  auto reject = [&](std::size_t line, RejectReason reason) {
    ++report.records_rejected;
    ++report.rejection_reasons[to_string(reason)];
    if (report.rejection_examples.size() < IngestReport::kMaxExamples)
      report.rejection_examples.push_back({line, reason});
  };

  Day min_day{}, max_day{};
  while (!rows.done()) {
    const std::size_t line = rows.next(fields);
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() < needed) {
      reject(line, RejectReason::missing_fields);
      continue;
    }
    auto person = trim(fields[c_person]);
    auto shelter = trim(fields[c_shelter]);
    if (person.empty()) {
      reject(line, RejectReason::empty_person_id);
      continue;
    }
    if (shelter.empty()) {
      reject(line, RejectReason::empty_shelter_id);
      continue;
    }
    if (is_reserved_node_name(shelter)) {
      reject(line, RejectReason::reserved_shelter_name);
      continue;
    }
    auto date = parse_day(trim(fields[c_date]), schema.date_format);
    if (!date) {
      reject(line, RejectReason::bad_date);
      continue;
    }
    if (*date < schema.min_date || *date > schema.max_date) {
      reject(line, RejectReason::date_out_of_range);
      continue;
    }
    auto duration = detail::parse_int(trim(fields[c_duration]));
    if (!duration) {
      reject(line, RejectReason::bad_duration);
      continue;
    }
    if (*duration <= 0) {
      reject(line, RejectReason::nonpositive_duration);
      continue;
    }
    if (*duration > schema.max_duration_days) {
      reject(line, RejectReason::duration_too_large);
      continue;
    }

    StayRecord rec{std::string(person), *date, std::string(shelter),
                   static_cast<std::int32_t>(*duration)};
    if (report.records_accepted == 0) {
      min_day = rec.start_date;
      max_day = rec.last_day();
    } else {
      min_day = std::min(min_day, rec.start_date);
      max_day = std::max(max_day, rec.last_day());
    }
    ++report.records_accepted;
    persons_seen.try_emplace(rec.person_id, 0);
    shelters_seen.try_emplace(rec.shelter_id, 0);
    out.records.push_back(std::move(rec));
  }

  report.distinct_persons = persons_seen.size();
  report.distinct_shelters = shelters_seen.size();
  if (report.records_accepted > 0) report.date_range = DateRange{min_day, max_day + 1};
  return out;
}

// Reads a whole file, transparently inflating gzip input.
inline std::string read_input_file(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw InputError("cannot open input file '" + path + "'");
  std::string data;
  std::array<char, 1 << 16> buf;
  for (;;) {
    int n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()));
    if (n < 0) {
      int errnum = 0;
      std::string msg = gzerror(f, &errnum);
      gzclose(f);
      throw InputError("cannot read input file '" + path + "': " + msg);
    }
    if (n == 0) break;
    data.append(buf.data(), static_cast<std::size_t>(n));
  }
  gzclose(f);
  return data;
}

// ---------------------------------------------------------------------------
// Day expansion

enum class ShelterId : std::uint32_t {};

inline constexpr std::uint32_t index(ShelterId s) { return static_cast<std::uint32_t>(s); }

// One person-day and the shelters used on it (sorted, unique, non-empty).
struct InteractionDay {
  Day date;
  std::vector<ShelterId> shelters;

  friend bool operator==(const InteractionDay&, const InteractionDay&) = default;
};

struct PersonDays {
  std::string person_id;
  std::vector<InteractionDay> days;  // ascending by date

  Day first_day() const { return days.front().date; }
  Day last_day() const { return days.back().date; }
};

inline std::size_t interaction_count(const std::vector<InteractionDay>& days) {
  std::size_t n = 0;
  for (const auto& d : days) n += d.shelters.size();
  return n;
}

struct ExpansionStats {
  std::size_t person_days = 0;
  std::size_t person_shelter_days = 0;
  std::size_t multi_shelter_days = 0;
  std::size_t duplicate_person_shelter_days = 0;
};

// Persons sorted by id; shelter ids are indices into the lexicographically
// sorted shelter name table, so ShelterId order equals name order.
struct Corpus {
  std::vector<std::string> shelters;
  std::vector<PersonDays> persons;
  ExpansionStats stats;

  const std::string& shelter_name(ShelterId s) const { return shelters.at(index(s)); }

  const PersonDays* find(std::string_view person_id) const {
    auto it = std::lower_bound(persons.begin(), persons.end(), person_id,
                               [](const PersonDays& p, std::string_view id) { return p.person_id < id; });
    if (it == persons.end() || it->person_id != person_id) return nullptr;
    return &*it;
  }
};

inline Corpus expand_to_interaction_days(const std::vector<StayRecord>& records) {
  Corpus corpus;

  std::unordered_map<std::string_view, std::uint32_t> shelter_index;
  for (const auto& r : records) shelter_index.try_emplace(r.shelter_id, 0);
  corpus.shelters.reserve(shelter_index.size());
  for (const auto& [name, _] : shelter_index) corpus.shelters.emplace_back(name);
  std::sort(corpus.shelters.begin(), corpus.shelters.end());
  for (std::uint32_t i = 0; i < corpus.shelters.size(); ++i) shelter_index[corpus.shelters[i]] = i;

  std::unordered_map<std::string_view, std::vector<std::uint32_t>> by_person;
  for (std::uint32_t i = 0; i < records.size(); ++i) by_person[records[i].person_id].push_back(i);
  std::vector<std::string_view> person_ids;
  person_ids.reserve(by_person.size());
  for (const auto& [id, _] : by_person) person_ids.push_back(id);
  std::sort(person_ids.begin(), person_ids.end());

  corpus.persons.reserve(person_ids.size());
  std::vector<std::pair<Day, std::uint32_t>> cells;
  for (auto id : person_ids) {
    cells.clear();
    for (auto ri : by_person[id]) {
      const auto& r = records[ri];
      const auto s = shelter_index[r.shelter_id];
      for (std::int32_t k = 0; k < r.duration_days; ++k) cells.emplace_back(r.start_date + k, s);
    }
    std::sort(cells.begin(), cells.end());
    const auto expanded = cells.size();
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
    corpus.stats.duplicate_person_shelter_days += expanded - cells.size();
    corpus.stats.person_shelter_days += cells.size();

    PersonDays person;
    person.person_id = std::string(id);
    for (const auto& [day, s] : cells) {
      if (person.days.empty() || person.days.back().date != day) {
        person.days.push_back({day, {}});
      }
      person.days.back().shelters.push_back(static_cast<ShelterId>(s));
    }
    for (const auto& d : person.days)
      if (d.shelters.size() > 1) ++corpus.stats.multi_shelter_days;
    corpus.stats.person_days += person.days.size();
    corpus.persons.push_back(std::move(person));
  }
  return corpus;
}

inline void annotate_overlaps(IngestReport& report, const Corpus& corpus) {
  report.person_days = corpus.stats.person_days;
  report.person_shelter_days = corpus.stats.person_shelter_days;
  report.multi_shelter_days = corpus.stats.multi_shelter_days;
  report.duplicate_person_shelter_days = corpus.stats.duplicate_person_shelter_days;
}

}  // namespace shelterflow
