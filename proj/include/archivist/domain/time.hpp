#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace archivist {

// UTC instant at millisecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// Injectable time source; services never read the system clock directly.
using Clock = std::function<Timestamp()>;

Timestamp system_now();
Clock system_clock();

// "2026-10-16T08:30:00Z", or "2026-10-16T08:30:00.250Z" when the instant has
// a sub-second part.
std::string format_rfc3339(Timestamp t);

// Accepts the forms above plus numeric offsets ("+01:00") and fractions of
// any length (truncated to milliseconds). Returns nullopt on malformed input.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

}  // namespace archivist
