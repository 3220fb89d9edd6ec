#include "corrx/dates.hpp"

#include <cstdio>

#include "corrx/errors.hpp"

namespace corrx {

namespace {

// Howard Hinnant's civil-days algorithms; exact for the proleptic Gregorian
// calendar over the full int range.
std::int32_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

void civil_from_days(std::int32_t z, int& y, int& m, int& d) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = yr + (m <= 2);
}

bool valid_ymd(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1) return false;
  static const int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int n = len[m - 1];
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) n = 29;
  return d <= n;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  if (!valid_ymd(year, month, day))
    throw ParseError("invalid calendar date components");
  return Date(days_from_civil(year, month, day));
}

std::optional<Date> Date::try_parse(const std::string& iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (iso[i] < '0' || iso[i] > '9') return std::nullopt;
  int y = std::stoi(iso.substr(0, 4));
  int m = std::stoi(iso.substr(5, 2));
  int d = std::stoi(iso.substr(8, 2));
  if (!valid_ymd(y, m, d)) return std::nullopt;
  return Date(days_from_civil(y, m, d));
}

Date Date::parse(const std::string& iso) {
  auto d = try_parse(iso);
  if (!d) throw ParseError("unparseable ISO-8601 date: '" + iso + "'");
  return *d;
}

std::string Date::to_string() const {
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

void Date::to_ymd(int& year, int& month, int& day) const {
  civil_from_days(days, year, month, day);
}

bool Date::is_weekday() const {
  // 1970-01-01 was a Thursday; weekday 0 = Monday.
  int wd = (days + 3) % 7;
  if (wd < 0) wd += 7;
  return wd < 5;
}

Date next_weekday(Date d) {
  do {
    d = d.plus_days(1);
  } while (!d.is_weekday());
  return d;
}

std::vector<Date> weekday_range(Date start, std::size_t n) {
  std::vector<Date> out;
  out.reserve(n);
  Date d = start.is_weekday() ? start : next_weekday(start);
  while (out.size() < n) {
    out.push_back(d);
    d = next_weekday(d);
  }
  return out;
}

}  // namespace corrx
