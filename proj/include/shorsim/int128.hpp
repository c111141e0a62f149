#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace shorsim {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i128 = __int128;

constexpr u128 u128_max = ~u128{0};

// 2^t as a bit mask over t bits; t = 128 means "all bits".
constexpr u128 low_bits_mask(unsigned t) {
    return t >= 128 ? u128_max : (u128{1} << t) - 1;
}

constexpr unsigned bit_length(u128 x) {
    unsigned n = 0;
    while (x != 0) { ++n; x >>= 1; }
    return n;
}

inline u64 mulmod_u64(u64 a, u64 b, u64 m) {
    return static_cast<u64>((u128{a} * b) % m);
}

// x mod 2^t reduced to the centered interval {-2^(t-1), ..., 2^(t-1)-1}.
inline i128 centered_mod_pow2(u128 x, unsigned t) {
    u128 r = x & low_bits_mask(t);
    u128 half = u128{1} << (t - 1);
    if (r >= half) return static_cast<i128>(r) - static_cast<i128>(u128{1} << (t - 1)) * 2;
    return static_cast<i128>(r);
}

std::string to_string_u128(u128 x);
std::string to_string_i128(i128 x);
u128 parse_u128(const std::string& s);

// floor(2^t / d) and 2^t mod d for t <= 128, d >= 1 (d = 1 with t = 128 is rejected:
// the quotient would not fit in 128 bits).
u128 pow2_div(unsigned t, u128 d);
u128 pow2_mod(unsigned t, u128 d);

// floor((k * 2^t + add) / d) for k < d <= 2^64, t <= 128; result < 2^t.
u128 shifted_div(u64 k, unsigned t, u64 add, u64 d);

// Inverse of an odd number modulo 2^t (t <= 128), by Hensel lifting.
u128 inverse_mod_pow2(u128 odd, unsigned t);

} // namespace shorsim
