#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shorsim/noise.hpp"
#include "shorsim/statevector.hpp"

using namespace shorsim;

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

TEST_CASE("erroneous plus states") {
    auto p0 = plus_state_amplitude_error(0.0);
    CHECK(p0.a0.real() == doctest::Approx(kInvSqrt2));
    CHECK(p0.a1.real() == doctest::Approx(kInvSqrt2));
    auto p1 = plus_state_amplitude_error(1.0);
    CHECK(p1.a0.real() == doctest::Approx(1.0));
    CHECK(std::abs(p1.a1) == doctest::Approx(0.0));
    auto p01 = plus_state_amplitude_error(0.1);
    CHECK(p01.a0.real() == doctest::Approx(std::sqrt(0.55)));
    CHECK(p01.a1.real() == doctest::Approx(std::sqrt(0.45)));

    auto f0 = plus_state_phase_error(0.0);
    CHECK(f0.a1.real() == doctest::Approx(kInvSqrt2));
    auto f1 = plus_state_phase_error(1.0);
    CHECK(f1.a1.real() == doctest::Approx(-kInvSqrt2));
    CHECK(f1.a1.imag() == doctest::Approx(0.0).epsilon(1e-12));
    auto fh = plus_state_phase_error(0.5);
    CHECK(fh.a1.real() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fh.a1.imag() == doctest::Approx(kInvSqrt2));
}

TEST_CASE("effective error probabilities") {
    CHECK(effective_error_probability(ErrorKind::amplitude_init, 0.0) == doctest::Approx(0.0));
    CHECK(effective_error_probability(ErrorKind::phase_init, 1.0) == doctest::Approx(1.0));
    CHECK(effective_error_probability(ErrorKind::amplitude_init, 0.1) ==
          doctest::Approx((1.0 - std::sqrt(0.99)) / 2).epsilon(1e-9));
    CHECK(effective_error_probability(ErrorKind::amplitude_init, 0.1) ==
          doctest::Approx(0.002506).epsilon(1e-3));
    CHECK(effective_error_probability(ErrorKind::classical_measure, 0.3) == 0.3);
    // overlap + error probability = 1 on a grid, both init kinds
    for (int i = 0; i <= 100; ++i) {
        double delta = i / 100.0;
        auto a = plus_state_amplitude_error(delta);
        double overlap_a = std::norm(kInvSqrt2 * a.a0 + kInvSqrt2 * a.a1);
        CHECK(overlap_a + effective_error_probability(ErrorKind::amplitude_init, delta) ==
              doctest::Approx(1.0).epsilon(1e-12));
        auto p = plus_state_phase_error(delta);
        double overlap_p = std::norm(kInvSqrt2 * p.a0 + kInvSqrt2 * p.a1);
        CHECK(overlap_p + effective_error_probability(ErrorKind::phase_init, delta) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    // inverse map round trip
    for (ErrorKind kind : {ErrorKind::amplitude_init, ErrorKind::phase_init,
                           ErrorKind::classical_measure, ErrorKind::bitflip}) {
        for (double p : {0.0, 0.001, 0.01, 0.1}) {
            double delta = delta_for_error_probability(kind, p);
            CHECK(effective_error_probability(kind, delta) == doctest::Approx(p).epsilon(1e-9));
        }
    }
}

TEST_CASE("classical flip statistics") {
    RngStream rng(3, 0, 0, RngDomain::measurement);
    CHECK(classical_flip(1, 0.0, rng).observed == 1);
    CHECK(classical_flip(1, 1.0, rng).observed == 0);
    int flips = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (classical_flip(0, 0.3, rng).flipped) ++flips;
    double sigma = std::sqrt(0.3 * 0.7 * n);
    CHECK(std::abs(flips - 0.3 * n) < 3 * sigma);
}

TEST_CASE("depolarizing measurement branch") {
    PauliProbs none{0.0, 0.0, 0.0};
    RngStream rng(4, 0, 0, RngDomain::measurement);
    auto out = depolarizing_measure_branch(0.7, none, rng);
    CHECK(out.p_prime_1 == doctest::Approx(0.7));
    CHECK(out.branch == MeasureBranch::correct);
    // p1 = 1, delta = 0.01: p'_1 = 0.99; conditional on bit = 1 the error
    // branch has probability 0
    PauliProbs small{0.005, 0.005, 0.0};
    for (u32 i = 0; i < 200; ++i) {
        RngStream r(5, i, 0, RngDomain::measurement);
        auto o = depolarizing_measure_branch(1.0, small, r);
        CHECK(o.p_prime_1 == doctest::Approx(0.99));
        if (o.bit == 1) CHECK(o.branch == MeasureBranch::correct);
        else CHECK(o.branch == MeasureBranch::error);
    }
    // p1 = 1/2 is a fixed point of Eq. (17) for any delta
    PauliProbs big{0.2, 0.15, 0.3};
    RngStream r2(6, 0, 0, RngDomain::measurement);
    CHECK(depolarizing_measure_branch(0.5, big, r2).p_prime_1 == doctest::Approx(0.5));
}

TEST_CASE("pure-pz depolarizing channel reproduces the error-free distribution") {
    FactoringProblem prob;
    prob.N = 21;
    prob.a = 2;
    prob.L = 5;
    prob.t = 8;
    ErrorConfig pz;
    pz.kind = ErrorKind::quantum_measure;
    pz.pauli = PauliProbs{0.0, 0.0, 0.3};
    pz.delta = 0.0;
    auto with_pz = exhaustive_joint_distribution(prob, pz);
    auto without = exhaustive_joint_distribution(prob, ErrorConfig::none_config());
    REQUIRE(with_pz.size() == without.size());
    for (std::size_t j = 0; j < without.size(); ++j)
        CHECK(with_pz[j] == doctest::Approx(without[j]).epsilon(1e-12));
}

TEST_CASE("classical error leaves the stage-0 probability untouched") {
    FactoringProblem prob;
    prob.N = 15;
    prob.a = 7;
    prob.L = 4;
    prob.t = 8;
    ErrorConfig e;
    e.kind = ErrorKind::classical_measure;
    e.delta = 0.4;
    IterativeShorEngine noisy(prob, e, SimulatorOptions{});
    IterativeShorEngine clean(prob, ErrorConfig::none_config(), SimulatorOptions{});
    for (u64 i = 0; i < 16; ++i) {
        auto a = noisy.run(9, i);
        auto b = clean.run(9, i);
        CHECK(a.trace[0].p1 == b.trace[0].p1); // identical before any flip feedback
    }
}

TEST_CASE("bitflip model") {
    RngStream rng(8, 0, 0, RngDomain::bitflip);
    CHECK(bitflip_bitstring(0b1011, 4, 0.0, rng) == 0b1011);
    CHECK(bitflip_bitstring(0b1011, 4, 1.0, rng) == 0b0100);
    // mean Hamming distance at delta = 0.1, t = 40 within 3 sigma of 4
    const int trials = 10000;
    const unsigned t = 40;
    u64 total = 0;
    for (int i = 0; i < trials; ++i) {
        RngStream r(9, static_cast<u32>(i), 0, RngDomain::bitflip);
        u128 flipped = bitflip_bitstring(0, t, 0.1, r);
        total += static_cast<u64>(__builtin_popcountll(static_cast<u64>(flipped)));
    }
    double mean = static_cast<double>(total) / trials;
    double sigma = std::sqrt(t * 0.1 * 0.9 / trials);
    CHECK(std::abs(mean - 4.0) < 3 * sigma);
}

TEST_CASE("error config parser") {
    auto q = parse_error_config("kind=quantum_measure,px=0.005,py=0.005");
    CHECK(q.kind == ErrorKind::quantum_measure);
    CHECK(q.delta == doctest::Approx(0.01));
    REQUIRE(q.pauli.has_value());
    CHECK(q.pauli->px == doctest::Approx(0.005));
    auto a = parse_error_config("kind=amplitude_init,delta=0.1");
    CHECK(a.kind == ErrorKind::amplitude_init);
    CHECK(a.delta == doctest::Approx(0.1));
    CHECK_THROWS_AS(parse_error_config("kind=quantum_measure,delta=0.1"), ConfigError);
    CHECK_THROWS_AS(parse_error_config("kind=bogus,delta=0.1"), ConfigError);
    CHECK_THROWS_AS(parse_error_config("delta=0.1"), ConfigError);
    ErrorConfig bad;
    bad.kind = ErrorKind::classical_measure;
    bad.delta = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
