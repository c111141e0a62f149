#pragma once

#include <array>
#include <cstdint>

#include "shorsim/int128.hpp"

namespace shorsim {

// Philox-4x32-10 counter-based generator (Salmon et al., SC'11 constants).
// Every draw is a pure function of (key, counter), so random numbers are
// addressed rather than streamed: replays and parallel schedules see
// identical values by construction.
namespace philox {

inline std::array<u32, 4> block(u64 key, std::array<u32, 4> ctr) {
    u32 k0 = static_cast<u32>(key);
    u32 k1 = static_cast<u32>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        u64 p0 = u64{0xD2511F53u} * ctr[0];
        u64 p1 = u64{0xCD9E8D57u} * ctr[2];
        std::array<u32, 4> next{static_cast<u32>(p1 >> 32) ^ ctr[1] ^ k0,
                                static_cast<u32>(p1),
                                static_cast<u32>(p0 >> 32) ^ ctr[3] ^ k1,
                                static_cast<u32>(p0)};
        ctr = next;
        k0 += 0x9E3779B9u;
        k1 += 0xBB67AE85u;
    }
    return ctr;
}

inline u64 draw_u64(u64 key, u32 c0, u32 c1, u32 c2, u32 c3) {
    auto out = block(key, {c0, c1, c2, c3});
    return (u64{out[0]} << 32) | out[1];
}

} // namespace philox

// Counter domains keep unrelated draw families statistically independent
// under one seed.
enum class RngDomain : u32 {
    measurement = 0,   // per-stage R and R2 draws
    bitflip = 1,       // final-bitstring flips
    problem_gen = 2,   // p, q, a sampling
    problem_seed = 3,  // per-problem seed derivation in campaigns
    sampler = 4,       // known-order distribution sampling
    postprocess = 5,   // random group elements in factor-from-order
};

// One addressable stream: key = seed, counter = (draw index, stream ids, domain).
class RngStream {
public:
    RngStream(u64 seed, u32 stream_a, u32 stream_b, RngDomain domain)
        : seed_(seed), a_(stream_a), b_(stream_b), domain_(static_cast<u32>(domain)) {}

    u64 next_u64() { return philox::draw_u64(seed_, index_++, a_, b_, domain_); }

    // Uniform in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Draw with an explicit index (leaves the running index untouched).
    u64 at(u32 index) const { return philox::draw_u64(seed_, index, a_, b_, domain_); }
    double at_double(u32 index) const {
        return static_cast<double>(at(index) >> 11) * 0x1.0p-53;
    }

    // Unbiased uniform integer in [0, n) by rejection.
    u64 below(u64 n) {
        if (n == 0) throw std::invalid_argument("RngStream::below(0)");
        u64 limit = ~u64{0} - ~u64{0} % n;
        u64 x;
        do { x = next_u64(); } while (x >= limit);
        return x % n;
    }

    u64 seed() const { return seed_; }

private:
    u64 seed_;
    u32 a_, b_, domain_;
    u32 index_ = 0;
};

inline u64 derive_seed(u64 seed, u32 index, RngDomain domain) {
    return philox::draw_u64(seed, index, 0, 0, static_cast<u32>(domain));
}

} // namespace shorsim
