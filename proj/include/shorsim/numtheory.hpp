#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "shorsim/biguint.hpp"
#include "shorsim/errors.hpp"
#include "shorsim/int128.hpp"

namespace shorsim {

// One continued-fraction convergent k/r of j/2^t, in lowest terms.
struct Convergent {
    u128 k = 0; // numerator
    u128 r = 1; // denominator
    bool operator==(const Convergent&) const = default;
};

// Multiplicative order r with its two-adic split r = odd_part * 2^two_adic_d.
struct OrderRecord {
    u64 value = 1;
    unsigned two_adic_d = 0;
    u64 odd_part = 1;
};

u64 gcd_u64(u64 a, u64 b);
u128 gcd_u128(u128 a, u128 b);

// g = gcd(a, b) together with x, y such that a*x + b*y = g.
struct ExtGcd {
    u64 g;
    i128 x;
    i128 y;
};
ExtGcd ext_gcd(u64 a, u64 b);

// Throws NotInvertibleError (carrying gcd(a, N)) when a is not a unit mod N.
u64 mod_inverse(u64 a, u64 n);

u64 mod_pow(u64 base, u64 exponent, u64 n);
u64 mod_pow(u64 base, const BigUint& exponent, u64 n);

bool is_probable_prime(u64 n, int rounds = 40);

// Prime factorization by trial division with a Brent-cycle Pollard rho
// fallback. Throws FactorizationTimeoutError once the rho iteration budget
// is exhausted.
struct PrimePower {
    u64 prime;
    unsigned exponent;
};
std::vector<PrimePower> factorize(u64 n, u64 rho_budget = 10'000'000);

u64 euler_totient_of_order(u64 r, u64 rho_budget = 10'000'000);

// Exact order of a modulo n. Brute force below 2^20; beyond that the prime
// factors of n must be supplied so the order can be found among the divisors
// of lcm(p-1, q-1). Ground truth for verification: never derived from the
// quantum pipeline.
OrderRecord multiplicative_order(u64 a, u64 n,
                                 std::optional<std::pair<u64, u64>> known_factors = {});

OrderRecord order_record_from_value(u64 r);

std::vector<Convergent> convergents(u128 j, unsigned t);

enum class DenominatorStop {
    below_modulus,    // largest r < N (default, matches reported statistics)
    below_sqrt_range, // largest r < 2^(t/2)
};

Convergent extract_denominator(u128 j, unsigned t, u64 n,
                               DenominatorStop stop = DenominatorStop::below_modulus);

u64 lcm_u64(u64 a, u64 b);

} // namespace shorsim
