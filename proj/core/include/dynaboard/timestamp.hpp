#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace dynaboard {

// Millisecond-resolution UTC instant; the resolution is what ISO-8601 text
// round-trips losslessly.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

Timestamp now_utc();

// "2026-10-16T11:05:00.123Z"
std::string format_iso8601(Timestamp t);

// Accepts "YYYY-MM-DDTHH:MM:SS[.fff]Z". Throws Error(kParseError).
Timestamp parse_iso8601(std::string_view text);

}  // namespace dynaboard
