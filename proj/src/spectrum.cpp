#include "shorsim/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace shorsim {

namespace {

constexpr double kPi = 3.14159265358979323846;

double exp2i(int e) { return std::exp2(static_cast<double>(e)); }

} // namespace

DistributionSpec make_distribution_spec(u64 order, unsigned t) {
    if (order == 0) throw std::invalid_argument("distribution: order must be positive");
    if (t == 0 || t > 128) throw std::invalid_argument("distribution: need 1 <= t <= 128");
    DistributionSpec spec;
    spec.order = order;
    spec.t = t;
    spec.d = static_cast<unsigned>(std::countr_zero(order));
    spec.odd = order >> spec.d;
    if (order == 1) {
        spec.s = 0; // unused; the distribution is a point mass at j = 0
        spec.rem = 0;
        return spec;
    }
    spec.rem = static_cast<u64>(pow2_mod(t, order));
    if (spec.rem == 0) {
        spec.s = pow2_div(t, order);
    } else {
        // (2^t - rem) / order without forming 2^t when t = 128.
        spec.s = ((u128_max - (spec.rem - 1)) & low_bits_mask(t)) / order;
        if (t < 128) spec.s = ((u128{1} << t) - spec.rem) / order;
    }
    return spec;
}

i128 alpha_of(const DistributionSpec& spec, u128 j) {
    if (spec.t < 128 && j >> spec.t) throw std::invalid_argument("alpha_of: j >= 2^t");
    return centered_mod_pow2(u128{spec.order} * j, spec.t);
}

int sigbits(i128 alpha) {
    if (alpha == 0) return 0;
    u128 mag = alpha < 0 ? static_cast<u128>(-alpha) : static_cast<u128>(alpha);
    int bits = static_cast<int>(bit_length(mag));
    return alpha < 0 ? -bits : bits;
}

namespace {

// Per-bitstring probability evaluated through the centered residue alpha, so
// the sine arguments stay small and exact under the mod-2 periodicity.
double prob_from_alpha(const DistributionSpec& spec, i128 alpha) {
    const double scale = exp2i(-2 * static_cast<int>(spec.t));
    const double orderf = static_cast<double>(spec.order);
    const double remf = static_cast<double>(spec.rem);
    if (alpha == 0) {
        double sd = static_cast<double>(spec.s);
        return (orderf * sd * sd + remf * (2.0 * sd + 1.0)) * scale;
    }
    if (spec.odd == 1) return 0.0; // order divides 2^t: all mass sits on alpha = 0
    i128 two_r = i128{2} * static_cast<i128>(spec.order);
    i128 u = alpha % two_r;
    if (u < -static_cast<i128>(spec.order)) u += two_r;
    else if (u >= static_cast<i128>(spec.order)) u -= two_r;
    double ratio_a = static_cast<double>(u) / orderf;
    double ratio_b = static_cast<double>(alpha) * exp2i(-static_cast<int>(spec.t));
    double ratio_rem = remf / orderf;
    double sin_den = std::sin(kPi * ratio_b);
    double x1 = ratio_a - ratio_rem * ratio_b; // == s*alpha/2^t (mod 2)
    double num1 = std::sin(kPi * x1);
    double x2 = 2.0 * x1 + ratio_b; // == (2s+1)*alpha/2^t (mod 2)
    double num2 = std::sin(kPi * x2);
    double ratio1 = num1 / sin_den;
    return (orderf * ratio1 * ratio1 + remf * (num2 / sin_den)) * scale;
}

bool alpha_aligned(const DistributionSpec& spec, i128 alpha) {
    u128 mask = (u128{1} << spec.d) - 1;
    return (static_cast<u128>(alpha) & mask) == 0;
}

} // namespace

double shor_distribution_prob(const DistributionSpec& spec, u128 j) {
    if (spec.t < 128 && (j >> spec.t) != 0)
        throw std::invalid_argument("shor_distribution_prob: j >= 2^t");
    if (spec.order == 1) return j == 0 ? 1.0 : 0.0;
    return prob_from_alpha(spec, alpha_of(spec, j));
}

double alpha_prob(const DistributionSpec& spec, i128 alpha) {
    if (!alpha_aligned(spec, alpha))
        throw std::invalid_argument("alpha_prob: alpha not a multiple of 2^d");
    if (spec.order == 1) return alpha == 0 ? 1.0 : 0.0;
    return exp2i(static_cast<int>(spec.d)) * prob_from_alpha(spec, alpha);
}

std::vector<u128> peak_bitstrings(const DistributionSpec& spec) {
    if (spec.t < 128 && spec.order >= (u128{1} << spec.t))
        throw std::invalid_argument("peak_bitstrings: requires order < 2^t");
    std::vector<u128> peaks;
    peaks.reserve(spec.order);
    for (u64 k = 0; k < spec.order; ++k)
        peaks.push_back(shifted_div(k, spec.t, spec.order / 2, spec.order));
    return peaks;
}

std::vector<u128> bitstrings_for_alpha(const DistributionSpec& spec, i128 alpha) {
    if (!alpha_aligned(spec, alpha))
        throw NoSolutionError("bitstrings_for_alpha: 2^d does not divide alpha");
    if (spec.d > 20)
        throw BudgetExceededError("bitstrings_for_alpha: 2^d bitstrings is too many to list");
    u128 mask = low_bits_mask(spec.t);
    u128 abar = static_cast<u128>(alpha) & mask; // alpha mod 2^t
    u128 inv = inverse_mod_pow2(spec.odd, spec.t);
    u128 base = ((abar >> spec.d) * inv) & mask;
    if (spec.d == 0) return {base};
    std::vector<u128> out;
    out.reserve(u64{1} << spec.d);
    u128 step = u128{1} << (spec.t - spec.d);
    for (u64 l = 0; l < (u64{1} << spec.d); ++l)
        out.push_back((base + l * step) & mask);
    return out;
}

namespace {

struct LatticeRange {
    i128 first = 0; // inclusive, aligned to 2^d
    u128 count = 0;
};

// Lattice points of the sigbits region b, clipped to the admissible window.
LatticeRange region_range(const DistributionSpec& spec, int b) {
    const unsigned t = spec.t;
    if (b == 0) return {0, 1};
    unsigned mag = static_cast<unsigned>(b < 0 ? -b : b);
    if (mag > t) return {};
    i128 lo, hi; // inclusive
    if (b > 0) {
        if (mag > t - 1) return {}; // positive side tops out at 2^(t-1) - 1
        lo = i128{1} << (mag - 1);
        hi = (i128{1} << mag) - 1;
        i128 window_hi = (i128{1} << (t - 1)) - 1;
        hi = std::min(hi, window_hi);
    } else {
        hi = -(i128{1} << (mag - 1));
        lo = -((i128{1} << mag) - 1);
        i128 window_lo = -(i128{1} << (t - 1));
        lo = std::max(lo, window_lo);
    }
    if (lo > hi) return {};
    i128 step = i128{1} << spec.d;
    i128 lo_rem = ((lo % step) + step) % step;
    i128 first = lo_rem == 0 ? lo : lo + (step - lo_rem);
    i128 last = hi - ((hi % step) + step) % step;
    if (last < first) return {};
    return {first, static_cast<u128>((last - first) / step) + 1};
}

// Composite Simpson with one Richardson step over [a, b] (magnitudes).
template <typename F>
double simpson_richardson(F f, double a, double b) {
    auto simpson = [&](int n) {
        double h = (b - a) / n;
        double acc = f(a) + f(b);
        for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return acc * h / 3.0;
    };
    double s1 = simpson(8);
    double s2 = simpson(16);
    return s2 + (s2 - s1) / 15.0;
}

// Approximate first-term lattice mass over magnitudes [a_mag, b_mag]: the
// rapidly oscillating sin^2 numerator averages to 1/2 on the 2^d lattice
// (exact over whole odd-part cycles), leaving the smooth 1/sin^2 envelope.
double envelope_integral(const DistributionSpec& spec, double a_mag, double b_mag,
                         const IntegrationSettings& settings) {
    if (a_mag >= b_mag) return 0.0;
    const double inv2t = exp2i(-static_cast<int>(spec.t));
    auto f = [&](double alpha) {
        double s = std::sin(kPi * alpha * inv2t);
        return 1.0 / (s * s);
    };
    unsigned pieces = 1u << settings.subregion_splits;
    double log_a = std::log2(a_mag), log_b = std::log2(b_mag);
    double total = 0.0;
    for (unsigned i = 0; i < pieces; ++i) {
        double lo = std::exp2(log_a + (log_b - log_a) * i / pieces);
        double hi = std::exp2(log_a + (log_b - log_a) * (i + 1) / pieces);
        total += simpson_richardson(f, lo, hi);
    }
    double scale = static_cast<double>(spec.order) * exp2i(-2 * static_cast<int>(spec.t) - 1);
    return total * scale * exp2i(-static_cast<int>(spec.d));
}

double lattice_mass(const DistributionSpec& spec, const LatticeRange& range,
                    const IntegrationSettings& settings) {
    if (range.count == 0) return 0.0;
    if (spec.order == 1) return range.first == 0 ? 1.0 : 0.0;
    if (spec.odd == 1) {
        // order divides 2^t: only alpha = 0 carries mass
        i128 step = i128{1} << spec.d;
        i128 last = range.first + static_cast<i128>(range.count - 1) * step;
        return (range.first <= 0 && 0 <= last) ? 1.0 : 0.0;
    }
    if (range.count <= settings.direct_sum_threshold) {
        double acc = 0.0;
        i128 step = i128{1} << spec.d;
        i128 alpha = range.first;
        for (u128 i = 0; i < range.count; ++i, alpha += step) acc += prob_from_alpha(spec, alpha);
        return acc * exp2i(static_cast<int>(spec.d));
    }
    i128 step = i128{1} << spec.d;
    i128 last = range.first + static_cast<i128>(range.count - 1) * step;
    double a_mag = std::min(std::abs(static_cast<double>(range.first)),
                            std::abs(static_cast<double>(last)));
    double b_mag = std::max(std::abs(static_cast<double>(range.first)),
                            std::abs(static_cast<double>(last)));
    double first_term = envelope_integral(spec, a_mag, b_mag, settings);
    double rem_term = static_cast<double>(range.count) * static_cast<double>(spec.rem) *
                      exp2i(static_cast<int>(spec.d) - 2 * static_cast<int>(spec.t));
    return first_term + rem_term;
}

} // namespace

double region_mass(const DistributionSpec& spec, int b) {
    if (spec.order == 1) return b == 0 ? 1.0 : 0.0;
    IntegrationSettings settings;
    return lattice_mass(spec, region_range(spec, b), settings);
}

KnownOrderSampler::KnownOrderSampler(const DistributionSpec& spec) : spec_(spec) {
    const unsigned t = spec_.t;
    u128 cached_points = 0;
    const u128 cache_cap = u128{1} << 22;
    for (int b = -static_cast<int>(t); b < static_cast<int>(t); ++b) {
        auto range = region_range(spec_, b);
        if (range.count == 0) continue;
        Region region;
        region.b = b;
        region.first = range.first;
        region.count = range.count;
        region.mass = lattice_mass(spec_, range, integration_);
        if (range.count <= integration_.direct_sum_threshold &&
            cached_points + range.count <= cache_cap && spec_.odd != 1) {
            std::vector<double> cdf;
            cdf.reserve(static_cast<std::size_t>(range.count));
            double acc = 0.0;
            i128 step = i128{1} << spec_.d;
            i128 alpha = range.first;
            for (u128 i = 0; i < range.count; ++i, alpha += step) {
                acc += prob_from_alpha(spec_, alpha);
                cdf.push_back(acc);
            }
            region.mass = acc * exp2i(static_cast<int>(spec_.d));
            region.cdf = std::move(cdf);
            cached_points += range.count;
        }
        if (region.mass > 0.0) regions_.push_back(std::move(region));
    }
    double acc = 0.0;
    region_cdf_.reserve(regions_.size());
    for (const auto& region : regions_) {
        acc += region.mass;
        region_cdf_.push_back(acc);
    }
    total_mass_ = acc;
}

i128 KnownOrderSampler::sample_alpha(const Region& region, RngStream& rng) const {
    const i128 step = i128{1} << spec_.d;
    if (region.cdf) {
        double target = rng.next_double() * region.cdf->back();
        auto it = std::lower_bound(region.cdf->begin(), region.cdf->end(), target);
        auto idx = static_cast<std::size_t>(it - region.cdf->begin());
        if (idx >= region.cdf->size()) idx = region.cdf->size() - 1;
        return region.first + static_cast<i128>(idx) * step;
    }
    // Bisect the lattice range, apportioning mass with the averaged envelope,
    // until a direct mini-CDF is affordable.
    i128 first = region.first;
    u128 count = region.count;
    double mass = region.mass;
    double target = rng.next_double() * mass;
    while (count > 4096) {
        u128 left_count = count / 2;
        i128 mid = first + static_cast<i128>(left_count) * step; // first of right half
        i128 left_last = mid - step;
        double a_mag = std::min(std::abs(static_cast<double>(first)),
                                std::abs(static_cast<double>(left_last)));
        double b_mag = std::max(std::abs(static_cast<double>(first)),
                                std::abs(static_cast<double>(left_last)));
        double left_mass = envelope_integral(spec_, a_mag, b_mag, integration_) +
                           static_cast<double>(left_count) * static_cast<double>(spec_.rem) *
                               exp2i(static_cast<int>(spec_.d) - 2 * static_cast<int>(spec_.t));
        if (target < left_mass) {
            count = left_count;
            mass = left_mass;
        } else {
            target -= left_mass;
            first = mid;
            count -= left_count;
            mass -= left_mass;
        }
    }
    double acc = 0.0;
    i128 alpha = first;
    std::vector<double> cdf;
    cdf.reserve(static_cast<std::size_t>(count));
    for (u128 i = 0; i < count; ++i, alpha += step) {
        acc += alpha_prob(spec_, alpha);
        cdf.push_back(acc);
    }
    double inner = target / mass * acc; // rescale onto the exact leaf mass
    auto it = std::lower_bound(cdf.begin(), cdf.end(), inner);
    auto idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= cdf.size()) idx = cdf.size() - 1;
    return first + static_cast<i128>(idx) * step;
}

u128 KnownOrderSampler::sample(RngStream& rng) const {
    if (spec_.order == 1 || regions_.empty()) return 0;
    double target = rng.next_double() * total_mass_;
    auto it = std::lower_bound(region_cdf_.begin(), region_cdf_.end(), target);
    auto idx = static_cast<std::size_t>(it - region_cdf_.begin());
    if (idx >= regions_.size()) idx = regions_.size() - 1;
    i128 alpha = sample_alpha(regions_[idx], rng);
    u128 mask = low_bits_mask(spec_.t);
    u128 abar = static_cast<u128>(alpha) & mask;
    u128 inv = inverse_mod_pow2(spec_.odd, spec_.t);
    u128 base = ((abar >> spec_.d) * inv) & mask;
    if (spec_.d == 0) return base;
    u64 l = rng.below(u64{1} << spec_.d);
    return (base + u128{l} * (u128{1} << (spec_.t - spec_.d))) & mask;
}

} // namespace shorsim
