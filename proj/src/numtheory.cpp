#include "shorsim/numtheory.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace shorsim {

u64 gcd_u64(u64 a, u64 b) { return std::gcd(a, b); }
u128 gcd_u128(u128 a, u128 b) {
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

u64 lcm_u64(u64 a, u64 b) {
    u128 l = u128{a} / std::gcd(a, b) * b;
    if (l > ~u64{0}) throw std::overflow_error("lcm_u64 overflow");
    return static_cast<u64>(l);
}

ExtGcd ext_gcd(u64 a, u64 b) {
    if (a == 0 && b == 0) throw std::invalid_argument("ext_gcd(0, 0)");
    i128 old_r = a, r = b;
    i128 old_x = 1, x = 0;
    i128 old_y = 0, y = 1;
    while (r != 0) {
        i128 q = old_r / r;
        old_r -= q * r; std::swap(old_r, r);
        old_x -= q * x; std::swap(old_x, x);
        old_y -= q * y; std::swap(old_y, y);
    }
    return {static_cast<u64>(old_r), old_x, old_y};
}

u64 mod_inverse(u64 a, u64 n) {
    if (n < 2) throw std::invalid_argument("mod_inverse: modulus < 2");
    auto e = ext_gcd(a % n, n);
    if (e.g != 1) throw NotInvertibleError(a, n, e.g);
    i128 x = e.x % static_cast<i128>(n);
    if (x < 0) x += n;
    return static_cast<u64>(x);
}

u64 mod_pow(u64 base, u64 exponent, u64 n) {
    if (n == 0) throw std::invalid_argument("mod_pow: modulus 0");
    if (n == 1) return 0;
    u64 result = 1;
    u64 b = base % n;
    while (exponent != 0) {
        if (exponent & 1) result = mulmod_u64(result, b, n);
        b = mulmod_u64(b, b, n);
        exponent >>= 1;
    }
    return result;
}

u64 mod_pow(u64 base, const BigUint& exponent, u64 n) {
    if (n == 0) throw std::invalid_argument("mod_pow: modulus 0");
    if (n == 1) return 0;
    u64 result = 1;
    u64 b = base % n;
    unsigned bits = exponent.bit_count();
    for (unsigned i = 0; i < bits; ++i) {
        if (exponent.bit(i)) result = mulmod_u64(result, b, n);
        b = mulmod_u64(b, b, n);
    }
    return result;
}

namespace {

bool miller_rabin_witness(u64 n, u64 a, u64 d, unsigned s) {
    u64 x = mod_pow(a % n, d, n);
    if (x == 1 || x == n - 1) return false;
    for (unsigned i = 1; i < s; ++i) {
        x = mulmod_u64(x, x, n);
        if (x == n - 1) return false;
    }
    return true; // composite for sure
}

u64 splitmix(u64 x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

bool is_probable_prime(u64 n, int rounds) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    u64 d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    // The fixed 12-base set is a proven deterministic test for all 64-bit n;
    // extra derived bases keep the advertised 4^-rounds contract meaningful.
    int done = 0;
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (done++ >= rounds) return true;
        if (miller_rabin_witness(n, a, d, s)) return false;
    }
    for (u64 i = 0; done < rounds; ++i, ++done) {
        u64 a = 2 + splitmix(n ^ splitmix(i)) % (n - 3);
        if (miller_rabin_witness(n, a, d, s)) return false;
    }
    return true;
}

namespace {

u64 brent_rho(u64 n, u64& budget) {
    if ((n & 1) == 0) return 2;
    for (u64 c = 1;; ++c) {
        u64 x = 2, y = 2, d = 1, q = 1, ys = 0;
        u64 r = 1;
        const u64 batch = 128;
        auto step = [&](u64 v) { return (static_cast<u64>((u128{v} * v) % n) + c) % n; };
        while (d == 1) {
            x = y;
            for (u64 i = 0; i < r; ++i) y = step(y);
            for (u64 k = 0; k < r && d == 1; k += batch) {
                ys = y;
                u64 lim = std::min(batch, r - k);
                for (u64 i = 0; i < lim; ++i) {
                    y = step(y);
                    q = mulmod_u64(q, x > y ? x - y : y - x, n);
                }
                if (budget < lim) throw FactorizationTimeoutError("pollard rho budget exhausted");
                budget -= lim;
                d = std::gcd(q, n);
            }
            r *= 2;
        }
        if (d == n) {
            // backtrack one by one from the last saved point
            d = 1;
            while (d == 1) {
                ys = step(ys);
                d = std::gcd(x > ys ? x - ys : ys - x, n);
                if (budget == 0) throw FactorizationTimeoutError("pollard rho budget exhausted");
                --budget;
            }
        }
        if (d != n) return d;
    }
}

void factor_rec(u64 n, u64& budget, std::vector<u64>& primes) {
    if (n == 1) return;
    if (is_probable_prime(n)) {
        primes.push_back(n);
        return;
    }
    u64 d = brent_rho(n, budget);
    factor_rec(d, budget, primes);
    factor_rec(n / d, budget, primes);
}

} // namespace

std::vector<PrimePower> factorize(u64 n, u64 rho_budget) {
    if (n == 0) throw std::invalid_argument("factorize(0)");
    std::vector<u64> primes;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull,
                  37ull, 41ull, 43ull, 47ull, 53ull, 59ull, 61ull, 67ull, 71ull, 73ull,
                  79ull, 83ull, 89ull, 97ull}) {
        while (n % p == 0) { primes.push_back(p); n /= p; }
    }
    if (n > 1) factor_rec(n, rho_budget, primes);
    std::sort(primes.begin(), primes.end());
    std::vector<PrimePower> out;
    for (u64 p : primes) {
        if (!out.empty() && out.back().prime == p) ++out.back().exponent;
        else out.push_back({p, 1});
    }
    return out;
}

u64 euler_totient_of_order(u64 r, u64 rho_budget) {
    if (r == 0) throw std::invalid_argument("euler_totient_of_order(0)");
    u64 phi = 1;
    for (const auto& pp : factorize(r, rho_budget)) {
        phi *= pp.prime - 1;
        for (unsigned e = 1; e < pp.exponent; ++e) phi *= pp.prime;
    }
    return phi;
}

OrderRecord order_record_from_value(u64 r) {
    OrderRecord rec;
    rec.value = r;
    rec.two_adic_d = 0;
    while ((r & 1) == 0) { r >>= 1; ++rec.two_adic_d; }
    rec.odd_part = r;
    return rec;
}

OrderRecord multiplicative_order(u64 a, u64 n,
                                 std::optional<std::pair<u64, u64>> known_factors) {
    if (n < 2) throw std::invalid_argument("multiplicative_order: modulus < 2");
    a %= n;
    if (std::gcd(a, n) != 1) throw std::invalid_argument("multiplicative_order: gcd(a, N) != 1");
    if (a == 1) return order_record_from_value(1);
    if (n < (u64{1} << 20) && !known_factors) {
        u64 x = a, r = 1;
        while (x != 1) {
            x = mulmod_u64(x, a, n);
            ++r;
        }
        return order_record_from_value(r);
    }
    if (!known_factors)
        throw std::invalid_argument("multiplicative_order: large modulus needs known factors");
    auto [p, q] = *known_factors;
    if (u128{p} * q != n) throw std::invalid_argument("multiplicative_order: p*q != N");
    u64 lambda = lcm_u64(p - 1, q - 1);
    u64 ord = lambda;
    for (const auto& pp : factorize(lambda)) {
        for (unsigned e = 0; e < pp.exponent; ++e) {
            if (ord % pp.prime == 0 && mod_pow(a, ord / pp.prime, n) == 1) ord /= pp.prime;
            else break;
        }
    }
    return order_record_from_value(ord);
}

std::vector<Convergent> convergents(u128 j, unsigned t) {
    if (t >= 128) throw std::invalid_argument("convergents: t must be < 128");
    u128 q = u128{1} << t;
    if (j >= q) throw std::invalid_argument("convergents: j >= 2^t");
    std::vector<Convergent> out;
    out.push_back(Convergent{0, 1}); // a0 = 0 since j/2^t < 1
    if (j == 0) return out;
    // Remaining partial quotients come from Euclid on (2^t, j); the p/q
    // recurrences build each convergent in lowest terms.
    u128 p_prev2 = 1, q_prev2 = 0; // p_{-1}, q_{-1}
    u128 p_prev = 0, q_prev = 1;   // p_0, q_0
    u128 num = q, den = j;
    while (den != 0) {
        u128 a = num / den;
        u128 rem = num % den;
        u128 p = a * p_prev + p_prev2;
        u128 qq = a * q_prev + q_prev2;
        out.push_back(Convergent{p, qq});
        p_prev2 = p_prev; p_prev = p;
        q_prev2 = q_prev; q_prev = qq;
        num = den;
        den = rem;
    }
    return out;
}

Convergent extract_denominator(u128 j, unsigned t, u64 n, DenominatorStop stop) {
    u128 bound = (stop == DenominatorStop::below_modulus) ? u128{n} : (u128{1} << (t / 2));
    Convergent best{0, 1};
    for (const auto& c : convergents(j, t)) {
        if (c.r < bound) best = c;
        else break; // denominators increase
    }
    return best;
}

} // namespace shorsim
