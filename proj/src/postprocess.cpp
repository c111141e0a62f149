#include "shorsim/postprocess.hpp"

#include <algorithm>
#include <cmath>

namespace shorsim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kExpGamma = 1.7810724179901979852; // e^gamma
constexpr double kExpMinusGamma = 0.5614594835668851698;

std::vector<u64> primes_up_to(u64 limit) {
    std::vector<bool> sieve(limit + 1, true);
    std::vector<u64> primes;
    for (u64 i = 2; i <= limit; ++i) {
        if (!sieve[i]) continue;
        primes.push_back(i);
        for (u64 k = i * i; k <= limit; k += i) sieve[k] = false;
    }
    return primes;
}

void add_nontrivial_factor(std::vector<u64>& factors, u64 g, u64 n) {
    if (g <= 1 || g >= n) return;
    if (std::find(factors.begin(), factors.end(), g) == factors.end()) factors.push_back(g);
    u64 cofactor = n / g;
    if (g * cofactor == n && cofactor > 1 && cofactor < n &&
        std::find(factors.begin(), factors.end(), cofactor) == factors.end())
        factors.push_back(cofactor);
}

} // namespace

const char* classification_name(Classification c) {
    switch (c) {
        case Classification::success: return "success";
        case Classification::lucky_ne: return "lucky_ne";
        case Classification::lucky_no: return "lucky_no";
        case Classification::lucky_oo: return "lucky_oo";
        case Classification::fail: return "fail";
    }
    return "?";
}

Classification classify_lucky(u64 r, u64 true_order, bool got_factor,
                              const StandardChecks& checks) {
    if (!got_factor) return Classification::fail;
    if (r == true_order)
        return (r % 2 == 0 && checks.all()) ? Classification::success : Classification::lucky_oo;
    return r % 2 == 0 ? Classification::lucky_ne : Classification::lucky_no;
}

PostProcessOutcome shor_standard_procedure(u128 j, unsigned t, u64 n_modulus, u64 a,
                                           std::optional<u64> known_order) {
    PostProcessOutcome outcome;
    outcome.convergent = extract_denominator(j, t, n_modulus);
    u64 r = static_cast<u64>(outcome.convergent.r);
    if (known_order) outcome.order_match = (r == *known_order);
    if (r < 2) return outcome; // no gcd attempt for the zero convergent
    outcome.checks.r_even = (r % 2 == 0);
    outcome.checks.a_r_is_one = mod_pow(a, r, n_modulus) == 1;
    u64 x = mod_pow(a, r / 2, n_modulus); // floor(r/2)
    outcome.checks.a_half_not_minus_one = (x != n_modulus - 1);
    // gcd(a^floor(r/2) +- 1, N), evaluated whether or not the checks hold
    add_nontrivial_factor(outcome.factors, gcd_u64((x + n_modulus - 1) % n_modulus, n_modulus),
                          n_modulus);
    add_nontrivial_factor(outcome.factors, gcd_u64((x + 1) % n_modulus, n_modulus), n_modulus);
    std::sort(outcome.factors.begin(), outcome.factors.end());
    if (known_order) {
        outcome.classification =
            classify_lucky(r, *known_order, !outcome.factors.empty(), outcome.checks);
    } else if (outcome.factors.empty()) {
        outcome.classification = Classification::fail;
    } else if (outcome.checks.all()) {
        outcome.classification = Classification::success;
    } else {
        outcome.classification =
            outcome.checks.r_even ? Classification::lucky_ne : Classification::lucky_no;
    }
    return outcome;
}

EkeraParams EkeraParams::for_problem(unsigned L, unsigned t) {
    EkeraParams params;
    params.B = L;
    params.c = 1;
    params.k = 100;
    params.varsigma = 1;
    params.m = L;
    params.ell = t > L ? t - L : 0;
    return params;
}

std::optional<u64> recover_order(u64 r_candidate, u64 a, u64 n_modulus,
                                 const EkeraParams& params) {
    if (r_candidate == 0) r_candidate = 1;
    if (params.m > 63) throw std::invalid_argument("recover_order: m <= 63");
    u64 cm = params.c * params.m;
    auto smooth_primes = primes_up_to(std::max<u64>(cm, 2));
    BigUint lifted(r_candidate);
    std::vector<u64> reduction_primes;
    u128 lift_cap = u128{1} << params.m;
    for (u64 q : smooth_primes) {
        if (q > cm) break;
        // largest q^e <= 2^m: covers every cm-smooth missing divisor D < 2^m
        u128 power = q;
        while (power * q <= lift_cap) power *= q;
        lifted.mul_u64(static_cast<u64>(power));
        reduction_primes.push_back(q);
    }
    for (const auto& pp : factorize(r_candidate)) reduction_primes.push_back(pp.prime);
    std::sort(reduction_primes.begin(), reduction_primes.end());
    reduction_primes.erase(std::unique(reduction_primes.begin(), reduction_primes.end()),
                           reduction_primes.end());

    if (mod_pow(a, lifted, n_modulus) != 1) return std::nullopt;
    // minimize: strip primes while a^(R/q) stays 1. The result is the order.
    for (u64 q : reduction_primes) {
        while (lifted.divisible_by(q)) {
            BigUint candidate = lifted;
            candidate.divmod_u64(q);
            if (mod_pow(a, candidate, n_modulus) == 1) lifted = candidate;
            else break;
        }
    }
    if (!lifted.fits_u64()) return std::nullopt; // cannot be: order < N
    return lifted.as_u64();
}

std::vector<u64> factor_from_order(u64 n_modulus, u64 order, RngStream& rng,
                                   unsigned k_trials, unsigned varsigma) {
    std::vector<u64> factors;
    OrderRecord rec = order_record_from_value(order);
    // one extra squaring level of slack on top of the two-adic depth
    unsigned levels = rec.two_adic_d + 1 + std::max(1u, varsigma);
    for (unsigned trial = 0; trial < k_trials; ++trial) {
        u64 x = 2 + rng.below(n_modulus - 2);
        u64 g = gcd_u64(x, n_modulus);
        if (g != 1) { // the draw itself factors N
            add_nontrivial_factor(factors, g, n_modulus);
            std::sort(factors.begin(), factors.end());
            return factors;
        }
        u64 y = mod_pow(x, rec.odd_part, n_modulus);
        for (unsigned level = 0; level < levels; ++level) {
            if (y == 1) break; // all later squarings stay 1
            add_nontrivial_factor(factors, gcd_u64((y + n_modulus - 1) % n_modulus, n_modulus),
                                  n_modulus);
            add_nontrivial_factor(factors, gcd_u64((y + 1) % n_modulus, n_modulus), n_modulus);
            if (!factors.empty()) {
                std::sort(factors.begin(), factors.end());
                return factors;
            }
            y = mulmod_u64(y, y, n_modulus);
        }
    }
    return factors;
}

PostProcessOutcome ekera_postprocess(u128 j, unsigned t, u64 n_modulus, u64 a,
                                     const EkeraParams& params, RngStream& rng,
                                     std::optional<u64> known_order) {
    PostProcessOutcome outcome;
    outcome.convergent = extract_denominator(j, t, n_modulus);
    u128 mask = low_bits_mask(t);
    for (u64 step = 0; step <= params.B; ++step) {
        for (int sign : {-1, +1}) {
            if (step == 0 && sign == +1) continue; // offset 0 once
            i128 offset = sign * static_cast<i128>(step);
            u128 j_prime = (j + static_cast<u128>(offset)) & mask;
            Convergent conv = extract_denominator(j_prime, t, n_modulus);
            auto order = recover_order(static_cast<u64>(conv.r), a, n_modulus, params);
            if (!order) continue;
            if (!outcome.recovered_order) outcome.recovered_order = *order;
            auto factors = factor_from_order(n_modulus, *order, rng, params.k, params.varsigma);
            if (!factors.empty()) {
                outcome.factors = std::move(factors);
                outcome.recovered_order = *order;
                outcome.candidate_offset = static_cast<int>(offset);
                outcome.classification = Classification::success;
                if (known_order) outcome.order_match = (*order == *known_order);
                return outcome;
            }
        }
    }
    outcome.classification = Classification::fail;
    if (known_order)
        outcome.order_match = outcome.recovered_order && *outcome.recovered_order == *known_order;
    return outcome;
}

double ekera_bound(const EkeraParams& params, unsigned L, unsigned n_factors) {
    double B = static_cast<double>(params.B);
    double t = static_cast<double>(params.m) + params.ell;
    double f1 = 1.0 - (2.0 / B + 1.0 / (B * B) + 1.0 / (3.0 * B * B)) / (kPi * kPi) -
                kPi * kPi * (2.0 * B + 1.0) / std::exp2(t / 2.0);
    double cm = static_cast<double>(params.c) * params.m;
    double f2 = 1.0 - 1.0 / (static_cast<double>(params.c) * std::log(cm));
    double sl = static_cast<double>(params.varsigma) * L;
    double choose2 = 0.5 * n_factors * (n_factors - 1.0);
    double f3 = 1.0 - std::exp2(-static_cast<double>(params.k)) * choose2 -
                1.0 / (2.0 * params.varsigma * params.varsigma * std::log(sl) * std::log(sl));
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    return clamp01(clamp01(f1) * clamp01(f2) * clamp01(f3));
}

double proposition_c_bound(unsigned n_factors) {
    return 1.0 - std::exp2(1.0 - static_cast<double>(n_factors));
}

ShorBound shor_bound(u64 n_modulus, unsigned n_factors) {
    if (n_modulus < 16) throw std::invalid_argument("shor_bound: N >= 16");
    ShorBound bound;
    bound.peak_factor = 4.0 / (kPi * kPi);
    bound.coprime_factor = kExpMinusGamma / std::log(std::log(static_cast<double>(n_modulus)));
    bound.parity_factor = proposition_c_bound(n_factors);
    bound.value = bound.peak_factor * bound.coprime_factor * bound.parity_factor;
    return bound;
}

double rosser_bound(u64 r) {
    if (r < 3) throw std::invalid_argument("rosser_bound: r >= 3 (phi(2)/2 = 1/2 is exact)");
    double ll = std::log(std::log(static_cast<double>(r)));
    double c = r == 223092870 ? 2.50637 : 2.5;
    return 1.0 / (kExpGamma * ll + c / ll);
}

} // namespace shorsim
