#include "engage/dates.hpp"

#include <cstdio>

#include "engage/error.hpp"

namespace engage {

namespace {

int digits(std::string_view s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) return -1;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return -1;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

Date checked_date(std::string_view text, int y, int m, int d) {
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (y < 0 || m < 1 || d < 1 || !date.ok())
    throw ValidationError("invalid date '" + std::string(text) + "'");
  return date;
}

}  // namespace

Date parse_date(std::string_view text) {
  int y = digits(text, 0, 4), m = digits(text, 5, 2), d = digits(text, 8, 2);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || y < 0 || m < 0 || d < 0)
    throw ValidationError("expected YYYY-MM-DD, got '" + std::string(text) + "'");
  return checked_date(text, y, m, d);
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  if (text.size() < 10)
    throw ValidationError("expected ISO-8601 timestamp, got '" + std::string(text) + "'");
  Date d = parse_date(text.substr(0, 10));
  int hh = 0, mm = 0, ss = 0;
  if (text.size() > 10) {
    if ((text[10] != 'T' && text[10] != ' ') || text.size() < 16 || text[13] != ':')
      throw ValidationError("expected ISO-8601 timestamp, got '" + std::string(text) + "'");
    hh = digits(text, 11, 2);
    mm = digits(text, 14, 2);
    if (text.size() > 16) {
      if (text.size() != 19 || text[16] != ':')
        throw ValidationError("expected ISO-8601 timestamp, got '" + std::string(text) + "'");
      ss = digits(text, 17, 2);
    }
    if (hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 || ss > 60)
      throw ValidationError("invalid time in '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  return sys_days{d} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  auto day = floor<days>(t);
  Date d{day};
  hh_mm_ss tod{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(d).c_str(),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

long long days_since_epoch(const Date& d) {
  return std::chrono::sys_days{d}.time_since_epoch().count();
}

}  // namespace engage
