#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "shorsim/numtheory.hpp"
#include "shorsim/spectrum.hpp"
#include "shorsim/statevector.hpp"

using namespace shorsim;

namespace {

FactoringProblem make_problem(u64 N, u64 a, std::optional<unsigned> t = {}) {
    FactoringProblem p;
    p.N = N;
    p.a = a;
    p.L = bit_length_u64(N);
    p.t = t ? *t : recommended_t(N);
    return p;
}

// The run loop assembled from the public per-gate operations, as a
// cross-check of the fused engine.
RunResult reference_run(const FactoringProblem& problem, const ErrorConfig& error, u64 seed,
                        u64 index, unsigned shards) {
    unsigned n = problem.L + 1;
    QubitPair reinit = reinit_state(error);
    ShardedState state = init_state(n, reinit, shards);
    std::vector<u64> a_pows(problem.t);
    a_pows[problem.t - 1] = problem.a % problem.N;
    for (unsigned s = problem.t - 1; s > 0; --s)
        a_pows[s - 1] = mulmod_u64(a_pows[s], a_pows[s], problem.N);
    RunResult result;
    u128 observed = 0, sampled = 0;
    for (unsigned s = 0; s < problem.t; ++s) {
        apply_oracle(state, a_pows[s], problem.N);
        apply_phase(state, s, observed);
        apply_hadamard_top(state);
        RngStream rng(seed, static_cast<u32>(index), s, RngDomain::measurement);
        MeasureResult mr = measure_top(state, rng, error);
        result.trace.push_back(StageTrace{s, mr.p1, mr.sampled_bit, mr.observed_bit, mr.event});
        observed |= u128{static_cast<unsigned>(mr.observed_bit)} << s;
        sampled |= u128{static_cast<unsigned>(mr.sampled_bit)} << s;
        if (s + 1 < problem.t) {
            int src = mr.branch == MeasureBranch::correct ? mr.sampled_bit : 1 - mr.sampled_bit;
            double p_src = state.group_norm_squared(src);
            reset_top(state, mr.sampled_bit, mr.branch, reinit, p_src);
        }
    }
    result.j_sampled = sampled;
    u128 j = observed;
    if (error.kind == ErrorKind::bitflip) {
        RngStream flip(seed, static_cast<u32>(index), 0, RngDomain::bitflip);
        j = bitflip_bitstring(j, problem.t, error.delta, flip);
    }
    result.bits = BitString{problem.t, j};
    return result;
}

} // namespace

TEST_CASE("initial state") {
    QubitPair plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    ShardedState st = init_state(2, plus, 2);
    CHECK(st.amp(0) == cplx{0.0, 0.0});
    CHECK(st.amp(1).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(st.amp(2) == cplx{0.0, 0.0});
    CHECK(st.amp(3).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(st.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
    // amplitude error with delta = 1 pins the top qubit to |0>
    ShardedState pinned = init_state(2, plus_state_amplitude_error(1.0), 2);
    CHECK(pinned.amp(1).real() == doctest::Approx(1.0));
    CHECK(std::abs(pinned.amp(3)) == doctest::Approx(0.0));
}

TEST_CASE("exchange plan structure") {
    // Fig.-3 setting: N = 55 = 5 x 11, a = 16, n = 7 qubits, 16 shards
    ShardLayout layout = make_shard_layout(7, 16);
    ExchangePlan plan = build_permutation_plan(16, 55, layout);
    CHECK(plan.y_limit == 55);
    CHECK_FALSE(plan.identity);
    // gather is a bijection on {y < N}
    std::vector<bool> seen(55, false);
    for (u64 z = 0; z < 55; ++z) {
        CHECK(plan.gather[z] < 55);
        CHECK_FALSE(seen[plan.gather[z]]);
        seen[plan.gather[z]] = true;
    }
    // amplitude at (1, y = 3) moves to (1, 48): receive side sees src 3 at dst 48
    CHECK(plan.gather[48] == 3);
    // total moved indices = N per group-1 copy
    u64 total = 0;
    for (const auto& row : plan.pair_counts)
        for (u64 c : row) total += c;
    CHECK(total == 55);
    // the shard covering only y >= N receives nothing: 8 group-1 shards of
    // size 8 cover y in [0, 64); the last one holds y in [56, 64), all >= 55
    for (unsigned src = 0; src < plan.pair_counts.size(); ++src)
        CHECK(plan.pair_counts[src][7] == 0);
    auto recv_last = plan_receive_lists(plan, 7);
    CHECK(recv_last.empty());
    // composing the plan for a and for a^-1 gives the identity
    ExchangePlan inverse = build_permutation_plan(plan.a_inv, 55, layout);
    for (u64 z = 0; z < 55; ++z) CHECK(inverse.gather[plan.gather[z]] == z);
    // identity plan for a = 1
    ExchangePlan id = build_permutation_plan(1, 55, layout);
    CHECK(id.identity);
    for (u64 z = 0; z < 55; ++z) CHECK(id.gather[z] == z);
    // send/receive lists are mutually consistent
    for (unsigned xr = 0; xr < 8; ++xr) {
        u64 recv_total = 0, send_total = 0;
        for (const auto& l : plan_receive_lists(plan, xr)) recv_total += l.local_index.size();
        for (const auto& l : plan_send_lists(plan, xr)) send_total += l.local_index.size();
        u64 z_begin = xr * layout.shard_size();
        u64 expected = z_begin >= 55 ? 0 : std::min<u64>(55 - z_begin, layout.shard_size());
        CHECK(recv_total == expected);
    }
}

TEST_CASE("oracle examples and inverse restoration") {
    QubitPair plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    ShardedState st = init_state(7, plus, 4);
    st.set_amp(st.group_base(1) + 3, cplx{0.5, 0.25}); // (1, y=3)
    apply_oracle(st, 16, 55);
    CHECK(st.amp_xy(1, 48) == cplx{0.5, 0.25}); // 16*3 mod 55 = 48
    CHECK(st.amp_xy(1, 3).real() == doctest::Approx(0.0));
    // x = 0 untouched, y >= N untouched
    CHECK(st.amp_xy(0, 1).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    st.set_amp(st.group_base(1) + 60, cplx{0.125, 0.0});
    apply_oracle(st, 16, 55);
    CHECK(st.amp_xy(1, 60) == cplx{0.125, 0.0});

    // randomized inverse restoration
    RngStream rng(17, 0, 0, RngDomain::problem_gen);
    for (int trial = 0; trial < 100; ++trial) {
        u64 n_mod = 3 + rng.below((u64{1} << 16) - 3);
        u64 a = 2 + rng.below(n_mod - 2);
        if (gcd_u64(a, n_mod) != 1) continue;
        unsigned n = bit_length_u64(n_mod) + 1;
        ShardedState state(n, 4);
        for (u64 y = 0; y < std::min<u64>(n_mod, 64); ++y)
            state.set_amp(state.group_base(1) + y,
                          cplx{rng.next_double() - 0.5, rng.next_double() - 0.5});
        ShardedState before = state;
        apply_oracle(state, a, n_mod);
        apply_oracle(state, mod_inverse(a, n_mod), n_mod);
        for (u64 y = 0; y < std::min<u64>(n_mod, 64); ++y)
            CHECK(std::abs(state.amp_xy(1, y) - before.amp_xy(1, y)) < 1e-12);
    }
}

TEST_CASE("phase gate") {
    CHECK(stage_phase(0, 0) == doctest::Approx(0.0));
    CHECK(stage_phase(1, 1) == doctest::Approx(3.14159265358979 / 2));
    CHECK(stage_phase(3, 5) == doctest::Approx(5 * 3.14159265358979 / 8));
    QubitPair plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    ShardedState st = init_state(3, plus, 2);
    apply_phase(st, 1, 1); // multiply group 1 by i
    cplx v = st.amp_xy(1, 1);
    CHECK(v.real() == doctest::Approx(0.0));
    CHECK(v.imag() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(st.amp_xy(0, 1).imag() == doctest::Approx(0.0));
}

TEST_CASE("hadamard on the top qubit") {
    QubitPair plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    ShardedState st = init_state(4, plus, 2);
    apply_hadamard_top(st); // |+>|y> -> |0>|y>
    CHECK(st.amp_xy(0, 1).real() == doctest::Approx(1.0));
    CHECK(std::abs(st.amp_xy(1, 1)) == doctest::Approx(0.0));
    // |->|y> -> |1>|y>
    ShardedState minus = init_state(4, QubitPair{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)}, 2);
    apply_hadamard_top(minus);
    CHECK(std::abs(minus.amp_xy(0, 1)) == doctest::Approx(0.0));
    CHECK(minus.amp_xy(1, 1).real() == doctest::Approx(1.0));
    // twice = identity
    ShardedState rnd(5, 4);
    RngStream rng(23, 0, 0, RngDomain::problem_gen);
    for (u64 i = 0; i < 32; ++i)
        rnd.set_amp(i, cplx{rng.next_double() - 0.5, rng.next_double() - 0.5});
    ShardedState copy = rnd;
    apply_hadamard_top(rnd);
    apply_hadamard_top(rnd);
    for (u64 i = 0; i < 32; ++i) CHECK(std::abs(rnd.amp(i) - copy.amp(i)) < 1e-12);
}

TEST_CASE("measurement basics") {
    QubitPair plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    // state |0>|y>: p1 = 0, bit always 0
    ShardedState zero = init_state(4, QubitPair{1.0, 0.0}, 2);
    for (u32 i = 0; i < 20; ++i) {
        RngStream rng(1, i, 0, RngDomain::measurement);
        auto mr = measure_top(zero, rng, ErrorConfig::none_config());
        CHECK(mr.p1 == doctest::Approx(0.0));
        CHECK(mr.sampled_bit == 0);
    }
    // stage-0 p1 is exactly 1/2 whenever the first oracle power a^(2^(t-1))
    // differs from 1; when the order divides 2^(t-1) the first oracle is the
    // identity and the Hadamard pair recombines to |0>, so p1 is exactly 0
    // (e.g. N=15, a=7, whose distribution is supported on multiples of 64)
    for (auto [N, a] : {std::pair<u64, u64>{15, 7}, {21, 2}, {55, 16}, {493, 5}}) {
        FactoringProblem prob = make_problem(N, a);
        IterativeShorEngine engine(prob, ErrorConfig::none_config(), SimulatorOptions{});
        auto run = engine.run(99, 0);
        double expected = engine.stage_multipliers()[0] == 1 ? 0.0 : 0.5;
        CHECK(run.trace[0].p1 == doctest::Approx(expected).epsilon(1e-12));
    }
    // delta = 0.5 quantum error on p1 = 1 gives sampling probability 1/2
    ShardedState one = init_state(4, QubitPair{0.0, 1.0}, 2);
    ErrorConfig q;
    q.kind = ErrorKind::quantum_measure;
    q.pauli = PauliProbs{0.25, 0.25, 0.0};
    q.delta = 0.5;
    int ones = 0;
    for (u32 i = 0; i < 4000; ++i) {
        RngStream rng(2, i, 0, RngDomain::measurement);
        auto mr = measure_top(one, rng, q);
        CHECK(mr.p1 == doctest::Approx(1.0));
        ones += mr.sampled_bit;
    }
    CHECK(std::abs(ones / 4000.0 - 0.5) < 0.03);
}

TEST_CASE("reset examples") {
    QubitPair plus{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    ShardedState st = init_state(4, QubitPair{1.0, 0.0}, 2); // |0>|1>
    // after measuring 0 with p0 = 1: reset reproduces |+>|1>
    reset_top(st, 0, MeasureBranch::correct, plus, 1.0);
    CHECK(st.amp_xy(0, 1).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(st.amp_xy(1, 1).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(st.norm_squared() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(reset_top(st, 1, MeasureBranch::error, plus, 0.0), DegenerateBranchError);
}

TEST_CASE("engine equals the composed public operations") {
    std::vector<ErrorConfig> configs;
    configs.push_back(ErrorConfig::none_config());
    {
        ErrorConfig e;
        e.kind = ErrorKind::classical_measure;
        e.delta = 0.2;
        configs.push_back(e);
        e.kind = ErrorKind::amplitude_init;
        e.delta = 0.15;
        configs.push_back(e);
        e.kind = ErrorKind::phase_init;
        e.delta = 0.3;
        configs.push_back(e);
        e.kind = ErrorKind::bitflip;
        e.delta = 0.1;
        configs.push_back(e);
        ErrorConfig q;
        q.kind = ErrorKind::quantum_measure;
        q.pauli = PauliProbs{0.02, 0.01, 0.05};
        q.delta = 0.03;
        configs.push_back(q);
    }
    for (const auto& error : configs) {
        for (auto [N, a] : {std::pair<u64, u64>{15, 7}, {21, 11}, {55, 16}, {57, 20}}) {
            FactoringProblem prob = make_problem(N, a, 10);
            SimulatorOptions options;
            options.shard_count = 4;
            IterativeShorEngine engine(prob, error, options);
            for (u64 idx = 0; idx < 8; ++idx) {
                RunResult fused = engine.run(31, idx);
                RunResult ref = reference_run(prob, error, 31, idx, 4);
                CHECK(fused.bits.j == ref.bits.j);
                CHECK(fused.j_sampled == ref.j_sampled);
                REQUIRE(fused.trace.size() == ref.trace.size());
                for (std::size_t s = 0; s < ref.trace.size(); ++s) {
                    CHECK(fused.trace[s].p1 == ref.trace[s].p1); // bit-identical
                    CHECK(fused.trace[s].sampled_bit == ref.trace[s].sampled_bit);
                    CHECK(fused.trace[s].observed_bit == ref.trace[s].observed_bit);
                }
            }
        }
    }
}

TEST_CASE("norm preserved through random circuits") {
    RngStream rng(41, 0, 0, RngDomain::problem_gen);
    for (int trial = 0; trial < 10; ++trial) {
        u64 n_mod = 100 + rng.below(100000);
        if (n_mod % 2 == 0) ++n_mod;
        u64 a = 2 + rng.below(n_mod - 2);
        if (gcd_u64(a, n_mod) != 1) continue;
        FactoringProblem prob = make_problem(n_mod, a, 12);
        SimulatorOptions options; // check_norms throws on drift beyond 1e-9
        IterativeShorEngine engine(prob, ErrorConfig::none_config(), options);
        CHECK_NOTHROW(engine.run(trial, 0));
    }
}

TEST_CASE("shard count and worker count do not change results") {
    FactoringProblem prob = make_problem(4087, 1001, 24); // 61 x 67, n = 13
    RunResult base = run_iterative_shor(prob, ErrorConfig::none_config(), 7, 3,
                                        SimulatorOptions{2, 1, 26, true});
    for (unsigned shards : {4u, 8u, 16u}) {
        RunResult other = run_iterative_shor(prob, ErrorConfig::none_config(), 7, 3,
                                             SimulatorOptions{shards, 1, 26, true});
        CHECK(other.bits.j == base.bits.j);
        for (std::size_t s = 0; s < base.trace.size(); ++s)
            CHECK(other.trace[s].p1 == base.trace[s].p1);
    }
    for (unsigned workers : {2u, 3u}) {
        RunResult other = run_iterative_shor(prob, ErrorConfig::none_config(), 7, 3,
                                             SimulatorOptions{4, workers, 26, true});
        CHECK(other.bits.j == base.bits.j);
        for (std::size_t s = 0; s < base.trace.size(); ++s)
            CHECK(other.trace[s].p1 == base.trace[s].p1);
    }
}

TEST_CASE("classical error delta = 1 flips every observed bit") {
    ErrorConfig e;
    e.kind = ErrorKind::classical_measure;
    e.delta = 1.0;
    FactoringProblem prob = make_problem(15, 7);
    auto run = run_iterative_shor(prob, e, 11, 0, SimulatorOptions{});
    for (const auto& st : run.trace) {
        CHECK(st.observed_bit == 1 - st.sampled_bit);
        CHECK(st.event.classical_flip);
    }
}

TEST_CASE("power-of-two order: early oracle stages are identity permutations") {
    // ord_15(7) = 4 = 2^2: a^(2^e) = 1 for e >= 2, so all oracle stages
    // except the last two multiply by 1
    FactoringProblem prob = make_problem(15, 7, 8);
    IterativeShorEngine engine(prob, ErrorConfig::none_config(), SimulatorOptions{});
    const auto& pows = engine.stage_multipliers();
    for (unsigned s = 0; s + 2 < pows.size(); ++s) CHECK(pows[s] == 1);
    CHECK(pows[6] == 4); // 7^2 mod 15
    CHECK(pows[7] == 7);
}

TEST_CASE("exhaustive distribution equals the analytic distribution") {
    for (auto [N, a] : {std::pair<u64, u64>{15, 7}, {15, 2}, {21, 2}, {33, 5}, {35, 4},
                        {55, 16}, {57, 5}, {49, 3}, {22, 7}}) {
        u64 order = multiplicative_order(a, N).value;
        for (unsigned t : {6u, 8u}) {
            FactoringProblem prob = make_problem(N, a, t);
            auto dist = exhaustive_joint_distribution(prob, ErrorConfig::none_config());
            auto spec = make_distribution_spec(order, t);
            double total = 0;
            for (u64 j = 0; j < dist.size(); ++j) {
                total += dist[j];
                CHECK(dist[j] == doctest::Approx(shor_distribution_prob(spec, j))
                                     .epsilon(1e-10));
            }
            CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("exhaustive distribution with N = 15, a = 7, t = 8 sits on the peaks") {
    FactoringProblem prob = make_problem(15, 7, 8);
    auto dist = exhaustive_joint_distribution(prob, ErrorConfig::none_config());
    for (u64 j = 0; j < 256; ++j) {
        if (j % 64 == 0) CHECK(dist[j] == doctest::Approx(0.25).epsilon(1e-12));
        else CHECK(dist[j] == doctest::Approx(0.0));
    }
}

TEST_CASE("exhaustive distribution marginalizes error branches") {
    FactoringProblem prob = make_problem(15, 7, 5);
    // classical error: compare against empirical simulator sampling
    ErrorConfig e;
    e.kind = ErrorKind::classical_measure;
    e.delta = 0.3;
    auto dist = exhaustive_joint_distribution(prob, e);
    double total = 0;
    for (double p : dist) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    IterativeShorEngine engine(prob, e, SimulatorOptions{});
    const int samples = 20000;
    std::vector<double> counts(dist.size(), 0.0);
    for (int i = 0; i < samples; ++i) ++counts[static_cast<std::size_t>(engine.run(5, i).bits.j)];
    for (u64 j = 0; j < dist.size(); ++j) {
        double sigma = std::sqrt(std::max(dist[j] * (1 - dist[j]) * samples, 1.0));
        CHECK(std::abs(counts[j] - dist[j] * samples) < 5 * sigma);
    }
    // quantum error branch marginalization
    ErrorConfig q;
    q.kind = ErrorKind::quantum_measure;
    q.pauli = PauliProbs{0.05, 0.05, 0.1};
    q.delta = 0.1;
    auto qdist = exhaustive_joint_distribution(prob, q);
    total = 0;
    for (double p : qdist) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(exhaustive_joint_distribution(make_problem(15, 7, 16),
                                                  ErrorConfig::none_config()),
                    BudgetExceededError);
}
