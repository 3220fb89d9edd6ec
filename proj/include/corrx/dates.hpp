#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace corrx {

/// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
struct Date {
  std::int32_t days = 0;

  Date() = default;
  explicit Date(std::int32_t d) : days(d) {}

  /// Parses "YYYY-MM-DD"; throws ParseError on malformed input.
  static Date parse(const std::string& iso);
  static std::optional<Date> try_parse(const std::string& iso);
  static Date from_ymd(int year, int month, int day);

  std::string to_string() const;
  void to_ymd(int& year, int& month, int& day) const;

  Date plus_days(int n) const { return Date(days + n); }
  /// Monday..Friday test, used when generating synthetic trading calendars.
  bool is_weekday() const;

  auto operator<=>(const Date&) const = default;
};

/// Next weekday strictly after `d`.
Date next_weekday(Date d);

/// `n` consecutive weekdays starting at `start` (start moved forward to a
/// weekday if needed).
std::vector<Date> weekday_range(Date start, std::size_t n);

}  // namespace corrx
