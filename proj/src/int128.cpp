#include "shorsim/int128.hpp"

#include <algorithm>

namespace shorsim {

std::string to_string_u128(u128 x) {
    if (x == 0) return "0";
    std::string s;
    while (x != 0) {
        s.push_back(static_cast<char>('0' + static_cast<unsigned>(x % 10)));
        x /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

std::string to_string_i128(i128 x) {
    if (x < 0) return "-" + to_string_u128(static_cast<u128>(-x));
    return to_string_u128(static_cast<u128>(x));
}

u128 parse_u128(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("parse_u128: empty string");
    u128 x = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("parse_u128: not a digit: " + s);
        u128 next = x * 10 + static_cast<unsigned>(c - '0');
        if (next < x) throw std::out_of_range("parse_u128: overflow: " + s);
        x = next;
    }
    return x;
}

u128 pow2_mod(unsigned t, u128 d) {
    if (d == 0) throw std::invalid_argument("pow2_mod: zero divisor");
    if (t < 128) return (u128{1} << t) % d;
    if (d == 1) return 0;
    return (u128_max % d + 1) % d;
}

u128 pow2_div(unsigned t, u128 d) {
    if (d == 0) throw std::invalid_argument("pow2_div: zero divisor");
    if (t < 128) return (u128{1} << t) / d;
    if (d == 1) throw std::invalid_argument("pow2_div: 2^128 / 1 does not fit");
    u128 rem = pow2_mod(t, d);
    if (rem == 0) {
        // d divides 2^128, so d is a power of two.
        unsigned e = bit_length(d) - 1;
        return u128{1} << (128 - e);
    }
    return (u128_max - (rem - 1)) / d;
}

u128 shifted_div(u64 k, unsigned t, u64 add, u64 d) {
    if (d == 0) throw std::invalid_argument("shifted_div: zero divisor");
    if (k >= d) throw std::invalid_argument("shifted_div: requires k < d");
    // Long division of the 192-bit value k*2^t + add by d, 64 bits at a time.
    // Numerator limbs (little endian, 64-bit), with k shifted left by t bits.
    u64 limb[4] = {add, 0, 0, 0};
    unsigned w = t / 64, b = t % 64;
    u128 shifted = u128{k} << b; // fits: k < 2^64, b < 64
    limb[w] = static_cast<u64>(limb[w] + static_cast<u64>(shifted));
    if (w + 1 < 4) limb[w + 1] = static_cast<u64>(shifted >> 64);
    u128 rem = 0;
    u64 quot[4];
    for (int i = 3; i >= 0; --i) {
        u128 cur = (rem << 64) | limb[i];
        quot[i] = static_cast<u64>(cur / d);
        rem = cur % d;
    }
    if (quot[2] != 0 || quot[3] != 0)
        throw std::overflow_error("shifted_div: quotient exceeds 128 bits");
    return (u128{quot[1]} << 64) | quot[0];
}

u128 inverse_mod_pow2(u128 odd, unsigned t) {
    if ((odd & 1) == 0) throw std::invalid_argument("inverse_mod_pow2: even argument");
    u128 x = odd; // correct to 3 bits; each step doubles the valid bit count
    for (int i = 0; i < 6; ++i) x *= 2 - odd * x;
    return x & low_bits_mask(t);
}

} // namespace shorsim
