#pragma once

#include <cstdint>
#include <string>

namespace faaslab {

/// Simulation time in integer microseconds. All event ordering is done on
/// this type; milliseconds appear only at the configuration and reporting
/// boundaries.
using SimTime = std::int64_t;

using WorkerIndex = std::uint32_t;
using FunctionIndex = std::uint32_t;
using RequestId = std::uint64_t;

constexpr SimTime kUsPerMs = 1000;
constexpr SimTime kUsPerSec = 1'000'000;

SimTime us_from_ms(double ms);

/// Renders a microsecond timestamp as a millisecond string with up to three
/// fractional digits and no trailing zeros ("150", "150.5", "0.001").
/// The representation is exact, so values round-trip through CSV files.
std::string format_ms(SimTime us);

/// Inverse of format_ms. Throws std::invalid_argument on malformed input or
/// more than three fractional digits.
SimTime parse_ms(const std::string& text);

} // namespace faaslab
