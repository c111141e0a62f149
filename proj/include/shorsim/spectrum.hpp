#pragma once

#include <optional>
#include <vector>

#include "shorsim/errors.hpp"
#include "shorsim/int128.hpp"
#include "shorsim/rng.hpp"

namespace shorsim {

// The pair (order, t) fully determines the bitstring distribution; s and the
// remainder 2^t - s*order are derived once and reused everywhere.
struct DistributionSpec {
    u64 order = 1;     // r-hat
    unsigned t = 1;    // bits per bitstring, <= 128
    u128 s = 0;        // floor(2^t / order)
    u64 rem = 0;       // 2^t - s * order, in [0, order)
    unsigned d = 0;    // two-adic valuation of the order
    u64 odd = 1;       // order >> d
};

DistributionSpec make_distribution_spec(u64 order, unsigned t);

// Centered residue {order * j}_{2^t} in {-2^(t-1), ..., 2^(t-1)-1}; always a
// multiple of 2^d.
i128 alpha_of(const DistributionSpec& spec, u128 j);

// Signed bit length: sign(alpha) * (floor(log2|alpha|) + 1), 0 at alpha = 0.
int sigbits(i128 alpha);

// Exact probability of bitstring j, removable singularities included.
double shor_distribution_prob(const DistributionSpec& spec, u128 j);

// Probability of a given alpha value (the 2^d bitstrings sharing it combined).
// Requires 2^d | alpha.
double alpha_prob(const DistributionSpec& spec, i128 alpha);

// The order's peaks round(k * 2^t / order), k = 0..order-1.
std::vector<u128> peak_bitstrings(const DistributionSpec& spec);

// All 2^d bitstrings j with {order * j}_{2^t} = alpha. Throws NoSolutionError
// when 2^d does not divide alpha.
std::vector<u128> bitstrings_for_alpha(const DistributionSpec& spec, i128 alpha);

// Total probability mass of the sigbits region b. Regions with at most
// 2^20 lattice points are summed exactly; larger ones are integrated
// (Simpson with Richardson extrapolation on 2^6 geometric subregions of the
// locally averaged envelope).
double region_mass(const DistributionSpec& spec, int b);

// Integration metadata recorded in sampler/CLI output.
struct IntegrationSettings {
    unsigned subregion_splits = 6;  // 2^nu subregions per region
    double target_rel_error = 1e-6; // per-region goal of the averaged envelope
    u64 direct_sum_threshold = u64{1} << 20;
};

// Samples bitstrings from the analytic distribution given a known order:
// region by cumulative mass, alpha within the region, then one of its 2^d
// bitstrings uniformly. Usable far beyond the simulator's qubit ceiling.
class KnownOrderSampler {
public:
    KnownOrderSampler(const DistributionSpec& spec);

    u128 sample(RngStream& rng) const;

    const DistributionSpec& spec() const { return spec_; }
    const IntegrationSettings& integration() const { return integration_; }
    double total_mass() const { return total_mass_; }

    struct Region {
        int b;
        i128 first;     // smallest alpha in the region (aligned to 2^d)
        u64 count;      // lattice points
        double mass;
        std::optional<std::vector<double>> cdf; // cumulative, when cached
    };
    const std::vector<Region>& regions() const { return regions_; }

private:
    i128 sample_alpha(const Region& region, RngStream& rng) const;

    DistributionSpec spec_;
    IntegrationSettings integration_;
    std::vector<Region> regions_;
    std::vector<double> region_cdf_;
    double total_mass_ = 1.0;
};

} // namespace shorsim
