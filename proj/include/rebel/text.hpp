#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Small string helpers shared across modules. All functions treat input
// as UTF-8; "character" means Unicode code point.
namespace rebel::text {

std::string_view trim(std::string_view s);

/// ASCII-only lowercase; non-ASCII bytes pass through untouched.
std::string to_lower(std::string_view s);

/// Collapses every run of whitespace into a single space and trims.
std::string collapse_whitespace(std::string_view s);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view s);

std::size_t count_code_points(std::string_view s);

/// Byte length of the prefix holding the first `n` code points (or the
/// whole string when it is shorter). Never lands inside a sequence.
std::size_t prefix_bytes(std::string_view s, std::size_t n);

}  // namespace rebel::text
