#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "shelterflow/error.hpp"

namespace shelterflow {

// A calendar day, stored as days since 1970-01-01.
class Day {
 public:
  constexpr Day() = default;
  constexpr explicit Day(std::int32_t serial) : serial_(serial) {}

  static Day from_ymd(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok()) {
      throw InputError("invalid calendar date " + std::to_string(y) + "-" +
                       std::to_string(m) + "-" + std::to_string(d));
    }
    return Day(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
  }

  constexpr std::int32_t serial() const { return serial_; }

  std::chrono::year_month_day ymd() const {
    using namespace std::chrono;
    return year_month_day{sys_days{days{serial_}}};
  }

  std::string iso() const {
    auto ymd_ = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                  static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
    return buf;
  }

  constexpr Day operator+(std::int32_t n) const { return Day(serial_ + n); }
  constexpr Day operator-(std::int32_t n) const { return Day(serial_ - n); }
  constexpr std::int32_t operator-(Day other) const { return serial_ - other.serial_; }
  constexpr Day& operator++() {
    ++serial_;
    return *this;
  }

  constexpr auto operator<=>(const Day&) const = default;

 private:
  std::int32_t serial_ = 0;
};

// Supported layouts for the date column. Anything after the date itself
// (a time of day, a 'T' separator) is ignored.
enum class DateFormat { iso, dmy, mdy };

inline std::optional<DateFormat> date_format_from_string(std::string_view s) {
  if (s == "%Y-%m-%d" || s == "iso") return DateFormat::iso;
  if (s == "%d/%m/%Y" || s == "dmy") return DateFormat::dmy;
  if (s == "%m/%d/%Y" || s == "mdy") return DateFormat::mdy;
  return std::nullopt;
}

inline const char* to_string(DateFormat f) {
  switch (f) {
    case DateFormat::iso: return "%Y-%m-%d";
    case DateFormat::dmy: return "%d/%m/%Y";
    case DateFormat::mdy: return "%m/%d/%Y";
  }
  return "?";
}

namespace detail {

// Reads up to max_digits decimal digits; returns false if none were read.
inline bool read_number(std::string_view s, std::size_t& pos, int max_digits, int& out) {
  int value = 0, n = 0;
  while (pos < s.size() && n < max_digits && s[pos] >= '0' && s[pos] <= '9') {
    value = value * 10 + (s[pos] - '0');
    ++pos;
    ++n;
  }
  out = value;
  return n > 0;
}

inline bool date_tail_ok(std::string_view s, std::size_t pos) {
  return pos == s.size() || s[pos] == 'T' || s[pos] == ' ' || s[pos] == 't';
}

}  // namespace detail

inline std::optional<Day> parse_day(std::string_view s, DateFormat format = DateFormat::iso) {
  int a = 0, b = 0, c = 0;
  std::size_t pos = 0;
  int y = 0, m = 0, d = 0;
  if (format == DateFormat::iso) {
    if (!detail::read_number(s, pos, 4, a) || pos != 4 || pos >= s.size() || s[pos++] != '-')
      return std::nullopt;
    if (!detail::read_number(s, pos, 2, b) || pos >= s.size() || s[pos++] != '-')
      return std::nullopt;
    if (!detail::read_number(s, pos, 2, c)) return std::nullopt;
    y = a, m = b, d = c;
  } else {
    if (!detail::read_number(s, pos, 2, a) || pos >= s.size() || s[pos++] != '/')
      return std::nullopt;
    if (!detail::read_number(s, pos, 2, b) || pos >= s.size() || s[pos++] != '/')
      return std::nullopt;
    std::size_t ystart = pos;
    if (!detail::read_number(s, pos, 4, c) || pos - ystart != 4) return std::nullopt;
    y = c;
    if (format == DateFormat::dmy) d = a, m = b;
    else m = a, d = b;
  }
  if (!detail::date_tail_ok(s, pos)) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Day(static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count()));
}

// Strict ISO parse for configuration values.
inline Day parse_iso_or_throw(std::string_view s, std::string_view what) {
  auto d = parse_day(s, DateFormat::iso);
  if (!d) throw ConfigError(std::string(what) + ": not an ISO date: '" + std::string(s) + "'");
  return *d;
}

// Half-open [start, end) day range.
struct DateRange {
  Day start;
  Day end;

  std::int32_t length() const { return end - start; }
  bool contains(Day d) const { return start <= d && d < end; }
  bool empty() const { return !(start < end); }
  friend bool operator==(const DateRange&, const DateRange&) = default;
};

}  // namespace shelterflow
