#include "shorsim/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>

#include "shorsim/numtheory.hpp"

namespace shorsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kPi = 3.14159265358979323846;
constexpr u64 kReductionBlock = 256; // fixed reduction granularity, independent
                                     // of shard and worker counts
constexpr double kNormTolerance = 1e-9;
constexpr double kDegenerateMass = 1e-300;

inline void kahan_add(double& sum, double& comp, double value) {
    double y = value - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
}

// Canonical reduction: plain sums inside fixed 256-element blocks (so all-zero
// tails contribute exactly nothing), compensated summation across the block
// partials in block order. Shard and worker splits are block-aligned, so the
// result is bit-identical for every legal configuration.
double combine_blocks(const double* blocks, std::size_t count) {
    double sum = 0, comp = 0;
    for (std::size_t i = 0; i < count; ++i) {
        // skipping exact zeros keeps the combine invariant to how many
        // all-zero blocks a representation happens to carry
        if (blocks[i] != 0.0) kahan_add(sum, comp, blocks[i]);
    }
    return sum;
}

std::size_t block_count_for(u64 elements) {
    return static_cast<std::size_t>((elements + kReductionBlock - 1) / kReductionBlock);
}

template <typename F>
void parallel_chunks(u64 total, unsigned workers, F&& f) {
    if (workers <= 1 || total < (u64{1} << 16)) {
        f(u64{0}, total);
        return;
    }
    u64 per = (total / workers + kReductionBlock) & ~(kReductionBlock - 1);
    std::vector<std::thread> threads;
    u64 begin = 0;
    while (begin < total) {
        u64 end = std::min(total, begin + per);
        threads.emplace_back([&f, begin, end] { f(begin, end); });
        begin = end;
    }
    for (auto& th : threads) th.join();
}

} // namespace

ShardLayout make_shard_layout(unsigned n, unsigned shard_count) {
    if (n < 2 || n > 33) throw std::invalid_argument("shard layout: need 2 <= n <= 33");
    if (shard_count < 2 || (shard_count & (shard_count - 1)) != 0)
        throw std::invalid_argument("shard layout: shard count must be a power of two >= 2");
    unsigned g = static_cast<unsigned>(std::countr_zero(shard_count));
    if (g > n - 1) throw std::invalid_argument("shard layout: more shards than group states");
    return ShardLayout{n, g};
}

ShardedState::ShardedState(unsigned n, unsigned shard_count)
    : layout_(make_shard_layout(n, shard_count)) {
    shards_.assign(layout_.shard_count(), std::vector<cplx>(layout_.shard_size()));
}

cplx ShardedState::amp(u64 global) const {
    return shards_[layout_.shard_of(global)][layout_.offset_of(global)];
}

void ShardedState::set_amp(u64 global, cplx v) {
    shards_[layout_.shard_of(global)][layout_.offset_of(global)] = v;
}

void ShardedState::group_spans(int x, u64 y_begin, u64 y_end, std::vector<Span>& out) {
    out.clear();
    u64 base = group_base(x);
    u64 y = y_begin;
    while (y < y_end) {
        u64 global = base + y;
        unsigned shard = layout_.shard_of(global);
        u64 off = layout_.offset_of(global);
        u64 run = std::min(y_end - y, layout_.shard_size() - off);
        out.push_back(Span{shards_[shard].data() + off, y, y + run});
        y += run;
    }
}

double ShardedState::group_norm_squared(int x) const {
    u64 size = layout_.group_size();
    std::vector<double> blocks(block_count_for(size), 0.0);
    u64 base = group_base(x);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        u64 y = b * kReductionBlock;
        u64 y_end = std::min(size, y + kReductionBlock);
        double s = 0;
        while (y < y_end) {
            u64 global = base + y;
            const auto& shard = shards_[layout_.shard_of(global)];
            u64 off = layout_.offset_of(global);
            u64 run = std::min(y_end - y, layout_.shard_size() - off);
            for (u64 i = 0; i < run; ++i) s += std::norm(shard[off + i]);
            y += run;
        }
        blocks[b] = s;
    }
    return combine_blocks(blocks.data(), blocks.size());
}

double ShardedState::norm_squared() const {
    return group_norm_squared(0) + group_norm_squared(1);
}

ShardedState init_state(unsigned n, QubitPair top_qubit_state, unsigned shard_count) {
    ShardedState state(n, shard_count);
    state.set_amp(1, top_qubit_state.a0);
    state.set_amp(state.layout().group_size() + 1, top_qubit_state.a1);
    return state;
}

ExchangePlan build_permutation_plan(u64 a_pow, u64 n_modulus, const ShardLayout& layout) {
    if (n_modulus < 2) throw std::invalid_argument("permutation plan: modulus >= 2");
    a_pow %= n_modulus;
    u64 a_inv = mod_inverse(a_pow, n_modulus); // throws NotInvertibleError if gcd != 1
    ExchangePlan plan;
    plan.modulus = n_modulus;
    plan.a_pow = a_pow;
    plan.a_inv = a_inv;
    plan.layout = layout;
    plan.y_limit = std::min(u64{n_modulus}, layout.group_size());
    plan.identity = a_pow == 1;
    plan.gather.resize(plan.y_limit);
    unsigned xshift = layout.n - layout.g; // group-relative shard of y
    plan.pair_counts.assign(layout.group_shards(),
                            std::vector<u64>(layout.group_shards(), 0));
    for (u64 z = 0; z < plan.y_limit; ++z) {
        u64 src = mulmod_u64(a_inv, z, n_modulus);
        plan.gather[z] = static_cast<u32>(src);
        plan.pair_counts[src >> xshift][z >> xshift] += 1;
    }
    return plan;
}

std::vector<ShardIndexList> plan_receive_lists(const ExchangePlan& plan, unsigned dst_xrank) {
    unsigned xshift = plan.layout.n - plan.layout.g;
    u64 shard_size = plan.layout.shard_size();
    u64 z_begin = u64{dst_xrank} * shard_size;
    u64 z_end = std::min(plan.y_limit, z_begin + shard_size);
    std::vector<ShardIndexList> lists(plan.layout.group_shards());
    for (unsigned s = 0; s < lists.size(); ++s) lists[s].xrank = s;
    for (u64 z = z_begin; z < z_end; ++z)
        lists[plan.gather[z] >> xshift].local_index.push_back(z - z_begin);
    std::erase_if(lists, [](const ShardIndexList& l) { return l.local_index.empty(); });
    return lists;
}

std::vector<ShardIndexList> plan_send_lists(const ExchangePlan& plan, unsigned src_xrank) {
    unsigned xshift = plan.layout.n - plan.layout.g;
    u64 shard_size = plan.layout.shard_size();
    std::vector<ShardIndexList> lists(plan.layout.group_shards());
    for (unsigned s = 0; s < lists.size(); ++s) lists[s].xrank = s;
    for (u64 z = 0; z < plan.y_limit; ++z) {
        u64 src = plan.gather[z];
        if ((src >> xshift) == src_xrank)
            lists[z >> xshift].local_index.push_back(src - u64{src_xrank} * shard_size);
    }
    std::erase_if(lists, [](const ShardIndexList& l) { return l.local_index.empty(); });
    return lists;
}

void apply_oracle(ShardedState& state, u64 a_pow, u64 n_modulus) {
    auto plan = build_permutation_plan(a_pow, n_modulus, state.layout());
    if (plan.identity) return;
    // Flatten group 1, gather, write back. The engine keeps a persistent
    // staging buffer; this standalone form favors clarity.
    u64 size = state.layout().group_size();
    std::vector<cplx> snapshot(size);
    std::vector<ShardedState::Span> spans;
    state.group_spans(1, 0, size, spans);
    for (const auto& sp : spans)
        std::copy(sp.data, sp.data + (sp.y_end - sp.y_begin), snapshot.begin() + sp.y_begin);
    for (const auto& sp : spans) {
        for (u64 y = sp.y_begin; y < sp.y_end; ++y) {
            if (y < plan.y_limit) sp.data[y - sp.y_begin] = snapshot[plan.gather[y]];
        }
    }
}

double stage_phase(unsigned cbit, u128 measured_bits_so_far) {
    if (cbit == 0) return 0.0;
    // prefix / 2^cbit is in [0, 1); pi * that needs no further reduction
    return kPi * static_cast<double>(measured_bits_so_far) *
           std::exp2(-static_cast<double>(cbit));
}

void apply_phase(ShardedState& state, unsigned cbit, u128 measured_bits_so_far) {
    double phi = stage_phase(cbit, measured_bits_so_far);
    if (phi == 0.0) return;
    cplx ph = std::polar(1.0, phi);
    std::vector<ShardedState::Span> spans;
    state.group_spans(1, 0, state.layout().group_size(), spans);
    for (const auto& sp : spans)
        for (u64 i = 0; i < sp.y_end - sp.y_begin; ++i) sp.data[i] *= ph;
}

void apply_hadamard_top(ShardedState& state) {
    u64 size = state.layout().group_size();
    std::vector<ShardedState::Span> spans0, spans1;
    state.group_spans(0, 0, size, spans0);
    state.group_spans(1, 0, size, spans1);
    // same shard geometry in both groups, so spans pair up one-to-one
    for (std::size_t k = 0; k < spans0.size(); ++k) {
        cplx* p0 = spans0[k].data;
        cplx* p1 = spans1[k].data;
        u64 count = spans0[k].y_end - spans0[k].y_begin;
        for (u64 i = 0; i < count; ++i) {
            cplx u = p0[i], v = p1[i];
            p0[i] = (u + v) * kInvSqrt2;
            p1[i] = (u - v) * kInvSqrt2;
        }
    }
}

MeasureResult sample_measurement(double p1, RngStream& stage_rng, const ErrorConfig& error) {
    MeasureResult result;
    result.p1 = p1;
    if (error.kind == ErrorKind::quantum_measure) {
        auto outcome = depolarizing_measure_branch(p1, *error.pauli, stage_rng);
        result.sampled_bit = outcome.bit;
        result.observed_bit = outcome.bit;
        result.branch = outcome.branch;
        result.event.quantum_error_branch = outcome.branch == MeasureBranch::error;
        return result;
    }
    double r = stage_rng.next_double();
    result.sampled_bit = r < p1 ? 1 : 0;
    result.observed_bit = result.sampled_bit;
    if (error.kind == ErrorKind::classical_measure) {
        auto flip = classical_flip(result.sampled_bit, error.delta, stage_rng);
        result.observed_bit = flip.observed;
        result.event.classical_flip = flip.flipped;
    }
    return result;
}

MeasureResult measure_top(const ShardedState& state, RngStream& stage_rng,
                          const ErrorConfig& error) {
    return sample_measurement(state.group_norm_squared(1), stage_rng, error);
}

void reset_top(ShardedState& state, int bit, MeasureBranch branch, QubitPair reinit,
               double p_source) {
    if (p_source < kDegenerateMass)
        throw DegenerateBranchError("reset_top: selected branch has no probability mass");
    int src = branch == MeasureBranch::correct ? bit : 1 - bit;
    double inv = 1.0 / std::sqrt(p_source);
    u64 size = state.layout().group_size();
    std::vector<ShardedState::Span> spans0, spans1;
    state.group_spans(0, 0, size, spans0);
    state.group_spans(1, 0, size, spans1);
    for (std::size_t k = 0; k < spans0.size(); ++k) {
        cplx* p0 = spans0[k].data;
        cplx* p1 = spans1[k].data;
        u64 count = spans0[k].y_end - spans0[k].y_begin;
        for (u64 i = 0; i < count; ++i) {
            cplx v = (src == 1 ? p1[i] : p0[i]) * inv;
            p0[i] = reinit.a0 * v;
            p1[i] = reinit.a1 * v;
        }
    }
}

IterativeShorEngine::IterativeShorEngine(const FactoringProblem& problem,
                                         const ErrorConfig& error,
                                         const SimulatorOptions& options)
    : problem_(problem), error_(error), options_(options) {
    error_.validate();
    n_ = problem.L + 1;
    if (n_ > options.qubit_ceiling)
        throw CeilingExceededError("simulator: n = " + std::to_string(n_) +
                                   " exceeds qubit ceiling " +
                                   std::to_string(options.qubit_ceiling));
    (void)make_shard_layout(n_, options.shard_count); // validates the split
    u64 group = u64{1} << (n_ - 1);
    y_limit_ = std::min(problem.N, group);
    g0_.assign(group, cplx{});
    g1_.assign(group, cplx{});
    staging_.assign(y_limit_, cplx{});
    block_sums_.assign(2 * block_count_for(y_limit_), 0.0);
    // stage multipliers a^(2^(t-1-s)) mod N, built by squaring backwards
    a_pows_.assign(problem.t, 0);
    a_pows_[problem.t - 1] = problem.a % problem.N;
    for (unsigned s = problem.t - 1; s > 0; --s)
        a_pows_[s - 1] = mulmod_u64(a_pows_[s], a_pows_[s], problem.N);
    stage_gather_.assign(problem.t, nullptr);
    for (unsigned s = 0; s < problem.t; ++s) {
        u64 a_pow = a_pows_[s];
        if (a_pow == 1) continue; // identity permutation, no communication
        auto it = gather_cache_.find(a_pow);
        if (it == gather_cache_.end()) {
            u64 a_inv = mod_inverse(a_pow, problem.N);
            std::vector<u32> gather(y_limit_);
            for (u64 z = 0; z < y_limit_; ++z)
                gather[z] = static_cast<u32>(mulmod_u64(a_inv, z, problem.N));
            it = gather_cache_.emplace(a_pow, std::move(gather)).first;
        }
        stage_gather_[s] = &it->second;
    }
}

RunResult IterativeShorEngine::run(u64 seed, u64 bitstring_index) {
    const unsigned t = problem_.t;
    const QubitPair reinit = reinit_state(error_);
    std::fill(g0_.begin(), g0_.end(), cplx{});
    std::fill(g1_.begin(), g1_.end(), cplx{});
    g0_[1] = reinit.a0;
    g1_[1] = reinit.a1;

    RunResult result;
    result.trace.reserve(t);
    u128 observed_prefix = 0, sampled_prefix = 0;
    const std::size_t nblocks = block_count_for(y_limit_);

    for (unsigned s = 0; s < t; ++s) {
        double phi = stage_phase(s, observed_prefix);
        cplx ph = std::polar(1.0, phi);
        const std::vector<u32>* gather = stage_gather_[s];
        if (gather) {
            // oracle permutation fused with the rotation gate: the phase is
            // applied while coefficients leave the contiguous blocks
            const u32* src = gather->data();
            parallel_chunks(y_limit_, options_.workers, [&](u64 lo, u64 hi) {
                for (u64 z = lo; z < hi; ++z) staging_[z] = g1_[src[z]] * ph;
            });
        }
        const cplx* src1 = gather ? staging_.data() : g1_.data();
        const bool phase_in_pass = !gather && phi != 0.0;
        // Hadamard on the top qubit plus per-block probability sums
        double* b0 = block_sums_.data();
        double* b1 = block_sums_.data() + nblocks;
        parallel_chunks(y_limit_, options_.workers, [&](u64 lo, u64 hi) {
            for (u64 blk = lo / kReductionBlock; blk * kReductionBlock < hi; ++blk) {
                u64 y = blk * kReductionBlock;
                u64 y_end = std::min(hi, y + kReductionBlock);
                double s0 = 0, s1 = 0;
                for (; y < y_end; ++y) {
                    cplx u = g0_[y];
                    cplx v = phase_in_pass ? src1[y] * ph : src1[y];
                    cplx h0 = (u + v) * kInvSqrt2;
                    cplx h1 = (u - v) * kInvSqrt2;
                    g0_[y] = h0;
                    g1_[y] = h1;
                    s0 += std::norm(h0);
                    s1 += std::norm(h1);
                }
                b0[blk] = s0;
                b1[blk] = s1;
            }
        });
        double p0 = combine_blocks(block_sums_.data(), nblocks);
        double p1 = combine_blocks(block_sums_.data() + nblocks, nblocks);
        if (options_.check_norms && std::abs(p0 + p1 - 1.0) > kNormTolerance)
            throw Error("statevector norm drifted beyond 1e-9 at stage " + std::to_string(s));

        RngStream stage_rng(seed, static_cast<u32>(bitstring_index), s,
                            RngDomain::measurement);
        MeasureResult mr = sample_measurement(p1, stage_rng, error_);
        result.trace.push_back(StageTrace{s, p1, mr.sampled_bit, mr.observed_bit, mr.event});
        observed_prefix |= u128{static_cast<unsigned>(mr.observed_bit)} << s;
        sampled_prefix |= u128{static_cast<unsigned>(mr.sampled_bit)} << s;

        if (s + 1 < t) {
            int src_group = mr.branch == MeasureBranch::correct ? mr.sampled_bit
                                                                : 1 - mr.sampled_bit;
            double p_src = src_group == 1 ? p1 : p0;
            if (p_src < kDegenerateMass)
                throw DegenerateBranchError("impossible measurement branch at stage " +
                                            std::to_string(s));
            double inv = 1.0 / std::sqrt(p_src);
            const cplx* sel = src_group == 1 ? g1_.data() : g0_.data();
            cplx w0 = reinit.a0, w1 = reinit.a1;
            parallel_chunks(y_limit_, options_.workers, [&](u64 lo, u64 hi) {
                for (u64 y = lo; y < hi; ++y) {
                    cplx v = sel[y] * inv;
                    g0_[y] = w0 * v;
                    g1_[y] = w1 * v;
                }
            });
        }
    }

    result.j_sampled = sampled_prefix;
    u128 j = observed_prefix;
    if (error_.kind == ErrorKind::bitflip) {
        RngStream flip_rng(seed, static_cast<u32>(bitstring_index), 0, RngDomain::bitflip);
        j = bitflip_bitstring(j, t, error_.delta, flip_rng);
    }
    result.bits = BitString{t, j};
    return result;
}

RunResult run_iterative_shor(const FactoringProblem& problem, const ErrorConfig& error,
                             u64 seed, u64 bitstring_index, const SimulatorOptions& options) {
    IterativeShorEngine engine(problem, error, options);
    return engine.run(seed, bitstring_index);
}

namespace {

struct FlatState {
    std::vector<cplx> g0, g1;
};

double flat_norm(const std::vector<cplx>& v) {
    double s = 0, c = 0;
    for (const cplx& z : v) kahan_add(s, c, std::norm(z));
    return s;
}

struct PathEnumerator {
    const FactoringProblem& problem;
    const ErrorConfig& error;
    u64 node_budget;
    QubitPair reinit;
    std::vector<std::vector<u32>> gathers; // per stage; empty = identity
    std::vector<double> dist;
    u64 y_limit;

    void stage_gates(FlatState& st, unsigned s, u128 observed_prefix) const {
        double phi = stage_phase(s, observed_prefix);
        cplx ph = std::polar(1.0, phi);
        const auto& gather = gathers[s];
        std::vector<cplx> v(st.g1.size());
        if (gather.empty()) {
            for (std::size_t y = 0; y < v.size(); ++y) v[y] = st.g1[y] * ph;
        } else {
            v = st.g1;
            for (u64 z = 0; z < y_limit; ++z) v[z] = st.g1[gather[z]] * ph;
        }
        for (std::size_t y = 0; y < v.size(); ++y) {
            cplx u = st.g0[y];
            st.g0[y] = (u + v[y]) * kInvSqrt2;
            st.g1[y] = (u - v[y]) * kInvSqrt2;
        }
    }

    FlatState project(const FlatState& st, int src_group, double p_src) const {
        double inv = 1.0 / std::sqrt(p_src);
        const auto& sel = src_group == 1 ? st.g1 : st.g0;
        FlatState out;
        out.g0.resize(sel.size());
        out.g1.resize(sel.size());
        for (std::size_t y = 0; y < sel.size(); ++y) {
            cplx v = sel[y] * inv;
            out.g0[y] = reinit.a0 * v;
            out.g1[y] = reinit.a1 * v;
        }
        return out;
    }

    void recurse(FlatState st, unsigned s, u128 observed, double weight) {
        if (node_budget == 0)
            throw BudgetExceededError("exhaustive_joint_distribution: node budget exhausted");
        --node_budget;
        if (s == problem.t) {
            dist[static_cast<std::size_t>(observed)] += weight;
            return;
        }
        stage_gates(st, s, observed);
        double p1 = flat_norm(st.g1);
        double p0 = flat_norm(st.g0);
        bool last = s + 1 == problem.t;

        auto descend = [&](int observed_bit, int src_group, double w) {
            if (w <= 0.0) return;
            u128 next_observed = observed | (u128{static_cast<unsigned>(observed_bit)} << s);
            double p_src = src_group == 1 ? p1 : p0;
            if (last) {
                if (node_budget == 0)
                    throw BudgetExceededError("exhaustive_joint_distribution: node budget");
                --node_budget;
                dist[static_cast<std::size_t>(next_observed)] += weight * w;
                return;
            }
            if (p_src <= 0.0) return;
            recurse(project(st, src_group, p_src), s + 1, next_observed, weight * w);
        };

        switch (error.kind) {
            case ErrorKind::quantum_measure: {
                double dxy = error.pauli->px + error.pauli->py;
                // joint weights: correct branch (1-d)p_bit, error branch d*p_(1-bit)
                for (int bit : {0, 1}) {
                    double p_bit = bit == 1 ? p1 : p0;
                    double p_other = bit == 1 ? p0 : p1;
                    descend(bit, bit, (1.0 - dxy) * p_bit);
                    descend(bit, 1 - bit, dxy * p_other);
                }
                break;
            }
            case ErrorKind::classical_measure: {
                double d = error.delta;
                for (int bit : {0, 1}) {
                    double p_bit = bit == 1 ? p1 : p0;
                    descend(bit, bit, p_bit * (1.0 - d));
                    descend(1 - bit, bit, p_bit * d);
                }
                break;
            }
            default: {
                descend(0, 0, p0);
                descend(1, 1, p1);
                break;
            }
        }
    }
};

} // namespace

std::vector<double> exhaustive_joint_distribution(const FactoringProblem& problem,
                                                  const ErrorConfig& error,
                                                  u64 node_budget) {
    if (problem.t > 14 || problem.L + 1 > 12)
        throw BudgetExceededError("exhaustive_joint_distribution: t <= 14 and n <= 12 required");
    error.validate();
    PathEnumerator enumerator{problem, error, node_budget, reinit_state(error), {}, {}, 0};
    unsigned n = problem.L + 1;
    u64 group = u64{1} << (n - 1);
    enumerator.y_limit = std::min(problem.N, group);
    std::vector<u64> a_pows(problem.t);
    a_pows[problem.t - 1] = problem.a % problem.N;
    for (unsigned s = problem.t - 1; s > 0; --s)
        a_pows[s - 1] = mulmod_u64(a_pows[s], a_pows[s], problem.N);
    enumerator.gathers.resize(problem.t);
    for (unsigned s = 0; s < problem.t; ++s) {
        if (a_pows[s] == 1) continue;
        u64 a_inv = mod_inverse(a_pows[s], problem.N);
        enumerator.gathers[s].resize(enumerator.y_limit);
        for (u64 z = 0; z < enumerator.y_limit; ++z)
            enumerator.gathers[s][z] = static_cast<u32>(mulmod_u64(a_inv, z, problem.N));
    }
    enumerator.dist.assign(std::size_t{1} << problem.t, 0.0);

    FlatState init;
    init.g0.assign(group, cplx{});
    init.g1.assign(group, cplx{});
    init.g0[1] = enumerator.reinit.a0;
    init.g1[1] = enumerator.reinit.a1;
    enumerator.recurse(std::move(init), 0, 0, 1.0);

    if (error.kind == ErrorKind::bitflip && error.delta > 0.0) {
        // convolve each bit position with the flip kernel
        auto& dist = enumerator.dist;
        double d = error.delta;
        for (unsigned bit = 0; bit < problem.t; ++bit) {
            std::size_t step = std::size_t{1} << bit;
            for (std::size_t j = 0; j < dist.size(); ++j) {
                if (j & step) continue;
                double a = dist[j], b = dist[j | step];
                dist[j] = (1.0 - d) * a + d * b;
                dist[j | step] = (1.0 - d) * b + d * a;
            }
        }
    }
    return enumerator.dist;
}

} // namespace shorsim
