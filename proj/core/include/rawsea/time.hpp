#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace rawsea {

/// UTC instant with millisecond resolution.
using UtcTime = std::chrono::sys_time<std::chrono::milliseconds>;

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]" (a space may replace the
/// 'T') and the Danish AIS export form "DD/MM/YYYY HH:MM:SS".
/// Throws Error{Format} on anything else.
UtcTime parse_utc(std::string_view text);

/// ISO-8601 with a trailing 'Z'; milliseconds are printed only when non-zero.
std::string format_utc(UtcTime t);

/// Whole UTC calendar days since the epoch (floor).
std::int64_t utc_day_number(UtcTime t);

}  // namespace rawsea
