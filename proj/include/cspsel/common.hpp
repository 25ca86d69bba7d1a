#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cspsel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text did not match a file format. Carries a 1-based position.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

using Rng = std::mt19937_64;

/// Uniform integer in [0, bound). Unlike std::uniform_int_distribution the
/// draw sequence is identical across standard library implementations.
std::uint64_t uniform_index(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
double uniform_unit(Rng& rng);

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// FNV-1a, used for seeds derived from content and for file checksums.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept;

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// `v` rounded to `digits` significant digits, for display.
std::string format_significant(double v, int digits);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

} // namespace cspsel
