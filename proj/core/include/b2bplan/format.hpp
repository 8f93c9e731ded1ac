#pragma once

#include <string>
#include <string_view>

namespace b2b {

/// Shortest decimal text that parses back to exactly `v`. "inf"/"-inf"/"nan"
/// for non-finite values.
std::string format_number(double v);

/// Strict parse of a whole field as a double; throws ParseError naming `what`.
double parse_number(std::string_view text, std::string_view what);

}  // namespace b2b
