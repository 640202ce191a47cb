#include "rawsea/time.hpp"

#include <charconv>
#include <cstdio>

#include "rawsea/error.hpp"

namespace rawsea {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  const char* first = s.data() + pos;
  for (std::size_t i = 0; i < len; ++i) {
    if (first[i] < '0' || first[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(first, first + len, out);
  return ec == std::errc{} && ptr == first + len;
}

[[noreturn]] void bad(std::string_view text) {
  throw Error(ErrorCode::Format, "unparseable UTC timestamp '" + std::string(text) + "'");
}

UtcTime compose(std::string_view text, int y, int mo, int d, int h, int mi, int s, int ms) {
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) bad(text);
  return UtcTime{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

}  // namespace

UtcTime parse_utc(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, ms = 0;
  // DD/MM/YYYY HH:MM:SS
  if (text.size() == 19 && text[2] == '/' && text[5] == '/') {
    if (!read_int(text, 0, 2, d) || !read_int(text, 3, 2, mo) || !read_int(text, 6, 4, y) ||
        text[10] != ' ' || !read_int(text, 11, 2, h) || text[13] != ':' ||
        !read_int(text, 14, 2, mi) || text[16] != ':' || !read_int(text, 17, 2, s)) {
      bad(text);
    }
    return compose(text, y, mo, d, h, mi, s, 0);
  }
  if (text.size() < 19 || !read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, mo) ||
      text[7] != '-' || !read_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
      !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) ||
      text[16] != ':' || !read_int(text, 17, 2, s)) {
    bad(text);
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    int frac = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) {
        frac = frac * 10 + (text[pos] - '0');
        ++digits;
      }
      ++pos;
    }
    if (digits == 0) bad(text);
    while (digits < 3) {
      frac *= 10;
      ++digits;
    }
    ms = frac;
  }
  const std::string_view tail = text.substr(pos);
  if (!(tail.empty() || tail == "Z" || tail == "+00:00" || tail == "+0000")) bad(text);
  return compose(text, y, mo, d, h, mi, s, ms);
}

std::string format_utc(UtcTime t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss tod{t - day_start};
  char buf[40];
  const auto ms = tod.subseconds().count();
  if (ms != 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()), static_cast<int>(ms));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
  }
  return buf;
}

std::int64_t utc_day_number(UtcTime t) {
  return std::chrono::floor<std::chrono::days>(t).time_since_epoch().count();
}

}  // namespace rawsea
