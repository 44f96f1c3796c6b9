#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace engage {

using Date = std::chrono::year_month_day;
using Timestamp = std::chrono::sys_seconds;

/// Parses YYYY-MM-DD. Throws ValidationError on malformed or impossible dates.
Date parse_date(std::string_view text);
std::string format_date(const Date& d);

/// Parses YYYY-MM-DD[THH:MM[:SS]][Z]; a bare date means midnight UTC.
Timestamp parse_timestamp(std::string_view text);
/// Always emits YYYY-MM-DDTHH:MM:SSZ.
std::string format_timestamp(Timestamp t);

/// Whole days since 1970-01-01.
long long days_since_epoch(const Date& d);

}  // namespace engage
