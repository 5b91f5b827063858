#include "dynaboard/timestamp.hpp"

#include <cstdio>
#include <ctime>

#include "dynaboard/error.hpp"

namespace dynaboard {

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now());
}

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto secs = floor<seconds>(t);
  const auto millis = (t - secs).count();
  const std::time_t tt = system_clock::to_time_t(secs);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                tm.tm_min, tm.tm_sec, static_cast<int>(millis));
  return buf;
}

Timestamp parse_iso8601(std::string_view text) {
  std::tm tm{};
  int millis = 0;
  const std::string owned(text);
  int consumed = 0;
  const int n = std::sscanf(owned.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n",
                            &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                            &tm.tm_min, &tm.tm_sec, &consumed);
  if (n != 6) {
    throw Error(Errc::kParseError, "bad timestamp '" + owned + "'");
  }
  std::string_view rest = text.substr(static_cast<size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    int digits = 0;
    size_t i = 1;
    for (; i < rest.size() && rest[i] >= '0' && rest[i] <= '9'; ++i) {
      if (digits < 3) {
        millis = millis * 10 + (rest[i] - '0');
        ++digits;
      }
    }
    for (; digits < 3; ++digits) millis *= 10;
    rest = rest.substr(i);
  }
  if (rest != "Z") {
    throw Error(Errc::kParseError, "timestamp must be UTC ('Z'): '" + owned + "'");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t tt = timegm(&tm);
  return std::chrono::time_point_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::from_time_t(tt)) +
         std::chrono::milliseconds(millis);
}

}  // namespace dynaboard
