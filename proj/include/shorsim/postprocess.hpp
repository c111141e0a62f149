#pragma once

#include <optional>
#include <vector>

#include "shorsim/int128.hpp"
#include "shorsim/numtheory.hpp"
#include "shorsim/rng.hpp"

namespace shorsim {

enum class Classification { success, lucky_ne, lucky_no, lucky_oo, fail };

const char* classification_name(Classification c);

// The standard-procedure conditions on the extracted denominator r. When the
// true order is known, order_match joins them as a fourth, verification-only
// check (the algorithm itself cannot test it).
struct StandardChecks {
    bool r_even = false;
    bool a_r_is_one = false;
    bool a_half_not_minus_one = false;
    bool all() const { return r_even && a_r_is_one && a_half_not_minus_one; }
};

struct PostProcessOutcome {
    Classification classification = Classification::fail;
    Convergent convergent;                 // the (k, r) used
    StandardChecks checks;
    std::optional<bool> order_match;       // r == true order, when known
    std::vector<u64> factors;              // nontrivial divisors, ascending
    std::optional<u64> recovered_order;    // order-recovery result (Ekera mode)
    std::optional<int> candidate_offset;   // which j' in the +-B sweep succeeded
};

// Continued-fraction extraction, the three checks, and gcd(a^floor(r/2) +- 1, N)
// evaluated regardless of whether the checks pass. r in {0, 1} fails without
// a gcd attempt.
PostProcessOutcome shor_standard_procedure(u128 j, unsigned t, u64 n_modulus, u64 a,
                                           std::optional<u64> known_order = {});

// Verification-mode labeling: requires the true order.
Classification classify_lucky(u64 r, u64 true_order, bool got_factor,
                              const StandardChecks& checks);

struct EkeraParams {
    u64 B = 1;           // peak-search radius
    u64 c = 1;           // smoothness parameter
    unsigned k = 100;    // factoring trial count
    unsigned varsigma = 1;
    unsigned m = 1;      // bit split, m + ell = t
    unsigned ell = 0;

    static EkeraParams for_problem(unsigned L, unsigned t); // (B,c,k,s)=(L,1,100,1), m=L
};

// Smooth-lift order recovery: R = r * prod_{q <= c*m} q^floor(log_q 2^m); if
// a^R = 1 (mod N), strip prime factors while the power stays 1. Returns the
// exact order, or nullopt when the lift misses it.
std::optional<u64> recover_order(u64 r_candidate, u64 a, u64 n_modulus,
                                 const EkeraParams& params);

// Complete factoring from a verified order: random x, exponents
// odd(order) * 2^i, gcd hunting on x^e +- 1. Returns {p, q} or empty.
std::vector<u64> factor_from_order(u64 n_modulus, u64 order, RngStream& rng,
                                   unsigned k_trials, unsigned varsigma);

// Neighborhood sweep j, j-1, j+1, ..., +-B; first verified order feeds
// factor_from_order; first nonempty factor set wins.
PostProcessOutcome ekera_postprocess(u128 j, unsigned t, u64 n_modulus, u64 a,
                                     const EkeraParams& params, RngStream& rng,
                                     std::optional<u64> known_order = {});

// Success-probability lower bound for the Ekera pipeline (three factors:
// peak proximity, order recovery, factoring from the order).
double ekera_bound(const EkeraParams& params, unsigned L, unsigned n_factors = 2);

struct ShorBound {
    double peak_factor;    // 4/pi^2
    double coprime_factor; // e^-gamma / log log N
    double parity_factor;  // 1 - 2^(1 - n_F)
    double value;
};
ShorBound shor_bound(u64 n_modulus, unsigned n_factors = 2);

double proposition_c_bound(unsigned n_factors);

// Rosser-Schoenfeld lower bound on phi(r)/r, valid for r >= 3 (the constant
// 5/2 becomes 2.50637 at the single exception r = 223092870).
double rosser_bound(u64 r);

} // namespace shorsim
