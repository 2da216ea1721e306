#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace garling {

// Index/length type for block constructions.  Deep searches routinely produce
// block lengths far beyond 2^63 (slowly decaying weights force index towers),
// so 128-bit integers are used throughout the construction layer.
using BigIndex = __int128;

constexpr BigIndex kBigIndexMax = (~__uint128_t{0}) >> 1;

inline std::string to_string(BigIndex v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    __uint128_t u = neg ? -static_cast<__uint128_t>(v) : static_cast<__uint128_t>(v);
    char buf[48];
    int pos = 48;
    while (u > 0) {
        buf[--pos] = static_cast<char>('0' + static_cast<int>(u % 10));
        u /= 10;
    }
    std::string s;
    if (neg) s.push_back('-');
    s.append(buf + pos, 48 - pos);
    return s;
}

inline BigIndex big_index_from_string(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("big_index_from_string: empty string");
    size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
        if (s.size() == 1) throw std::invalid_argument("big_index_from_string: sign only");
    }
    __uint128_t u = 0;
    const __uint128_t umax = ~__uint128_t{0} >> 1;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c < '0' || c > '9')
            throw std::invalid_argument("big_index_from_string: bad digit in '" + s + "'");
        int d = c - '0';
        if (u > (umax - static_cast<unsigned>(d)) / 10)
            throw std::overflow_error("big_index_from_string: overflow: " + s);
        u = u * 10 + static_cast<unsigned>(d);
    }
    BigIndex v = static_cast<BigIndex>(u);
    return neg ? -v : v;
}

inline double to_double(BigIndex v) { return static_cast<double>(v); }

// Round a positive double up to a BigIndex (used by geometric scan schedules).
inline BigIndex big_index_from_double_ceil(double x) {
    if (x <= 0) return 0;
    if (x >= 1.5e38) throw std::overflow_error("big_index_from_double_ceil: out of range");
    auto v = static_cast<BigIndex>(x);
    if (static_cast<double>(v) < x) ++v;
    return v;
}

}  // namespace garling
