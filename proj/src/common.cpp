#include "cspsel/common.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace cspsel {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

std::uint64_t uniform_index(Rng& rng, std::uint64_t bound) {
    if (bound == 0) {
        throw Error("uniform_index: empty range");
    }
    // Multiply-shift with rejection (Lemire 2019): the high word of
    // r * bound is uniform once low words below 2^64 mod bound are redrawn.
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>(rng()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<u128>(rng()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double uniform_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v) {
    if (v == 0.0) {
        return "0";
    }
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::string format_significant(double v, int digits) {
    if (v == 0.0) {
        return "0";
    }
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.*g", digits, v);
    return std::string(buf.data());
}

double parse_double(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw Error("not a finite number: '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw Error("not an integer: '" + std::string(text) + "'");
    }
    return v;
}

} // namespace cspsel
