#pragma once

#include <complex>
#include <map>
#include <vector>

#include "shorsim/errors.hpp"
#include "shorsim/int128.hpp"
#include "shorsim/noise.hpp"
#include "shorsim/problems.hpp"
#include "shorsim/rng.hpp"

namespace shorsim {

using cplx = std::complex<double>;

// Power-of-two shard split of the 2^n amplitude array. The most significant
// index bit selects the group: amplitudes with top bit x live entirely in
// shards [x*S/2, (x+1)*S/2).
struct ShardLayout {
    unsigned n = 2;
    unsigned g = 1; // shard count S = 2^g
    unsigned shard_count() const { return 1u << g; }
    u64 shard_size() const { return u64{1} << (n - g); }
    u64 group_size() const { return u64{1} << (n - 1); }
    unsigned group_shards() const { return 1u << (g - 1); }
    unsigned shard_of(u64 global) const { return static_cast<unsigned>(global >> (n - g)); }
    u64 offset_of(u64 global) const { return global & (shard_size() - 1); }
};

ShardLayout make_shard_layout(unsigned n, unsigned shard_count);

class ShardedState {
public:
    ShardedState() = default;
    ShardedState(unsigned n, unsigned shard_count);

    const ShardLayout& layout() const { return layout_; }
    unsigned qubits() const { return layout_.n; }

    cplx amp(u64 global) const;
    void set_amp(u64 global, cplx v);
    // amplitude of |x>|y>
    cplx amp_xy(int x, u64 y) const { return amp(group_base(x) + y); }

    u64 group_base(int x) const { return x == 0 ? 0 : layout_.group_size(); }

    std::vector<std::vector<cplx>>& shards() { return shards_; }
    const std::vector<std::vector<cplx>>& shards() const { return shards_; }

    // Contiguous pieces of group x covering y in [y_begin, y_end).
    struct Span {
        cplx* data;
        u64 y_begin;
        u64 y_end;
    };
    void group_spans(int x, u64 y_begin, u64 y_end, std::vector<Span>& out);

    // Deterministic total norm (fixed-block compensated summation).
    double norm_squared() const;
    double group_norm_squared(int x) const;

private:
    ShardLayout layout_;
    std::vector<std::vector<cplx>> shards_;
};

// |+'>|0...01>: amplitude of |x>|1> is the top-qubit pair component x.
ShardedState init_state(unsigned n, QubitPair top_qubit_state, unsigned shard_count);

// Exchange plan for the controlled modular multiplication: the oracle is a
// permutation of group-1 coefficients, realized receive-side as a gather
// ordered by destination index (src[z] = a_inv * z mod N). Per-shard send
// and receive lists are derivable views for inspection and tests.
struct ExchangePlan {
    u64 modulus = 1;
    u64 a_pow = 1;
    u64 a_inv = 1;
    u64 y_limit = 0; // min(N, 2^(n-1)); indices beyond stay put
    ShardLayout layout;
    std::vector<u32> gather; // size y_limit; gather[z] = a_inv * z mod N
    bool identity = false;

    // moved coefficients between group-1 shards, indexed [src_xrank][dst_xrank]
    std::vector<std::vector<u64>> pair_counts;
};

ExchangePlan build_permutation_plan(u64 a_pow, u64 n_modulus, const ShardLayout& layout);

struct ShardIndexList {
    unsigned xrank;               // the other shard (group-relative rank)
    std::vector<u64> local_index; // local indices, in the receiver's order
};
// For group-1 shard dst_xrank: which local slots receive from which source shard.
std::vector<ShardIndexList> plan_receive_lists(const ExchangePlan& plan, unsigned dst_xrank);
// For group-1 shard src_xrank: which local slots are sent to which destination shard.
std::vector<ShardIndexList> plan_send_lists(const ExchangePlan& plan, unsigned src_xrank);

// In-place oracle application (uses an internal staging buffer).
void apply_oracle(ShardedState& state, u64 a_pow, u64 n_modulus);

// Multiply every group-1 amplitude by e^{i phi_cbit}, phi = pi * prefix / 2^cbit.
void apply_phase(ShardedState& state, unsigned cbit, u128 measured_bits_so_far);

double stage_phase(unsigned cbit, u128 measured_bits_so_far);

void apply_hadamard_top(ShardedState& state);

struct ErrorEvent {
    bool classical_flip = false;
    bool quantum_error_branch = false;
};

struct MeasureResult {
    int sampled_bit;
    int observed_bit;
    double p1; // Eq.-(12) probability, before any error channel
    MeasureBranch branch = MeasureBranch::correct;
    ErrorEvent event;
};

// Sample the top qubit (state must be post-Hadamard). Uses draw indices 0 (R)
// and 1 (R2) of the supplied stage stream.
MeasureResult measure_top(const ShardedState& state, RngStream& stage_rng,
                          const ErrorConfig& error);

// Shared sampling logic given a known p1.
MeasureResult sample_measurement(double p1, RngStream& stage_rng, const ErrorConfig& error);

// Project onto the measured (or error-branch) group and reinitialize the top
// qubit in `reinit`. `p_source` is the probability mass of the source group.
void reset_top(ShardedState& state, int bit, MeasureBranch branch, QubitPair reinit,
               double p_source);

struct StageTrace {
    unsigned cbit;
    double p1;
    int sampled_bit;
    int observed_bit;
    ErrorEvent event;
};

struct BitString {
    unsigned t = 0;
    u128 j = 0;
};

struct RunResult {
    BitString bits;          // observed bitstring, final bit flips included
    u128 j_sampled = 0;      // pre-bitflip-model assembled bits
    std::vector<StageTrace> trace;
};

struct SimulatorOptions {
    unsigned shard_count = 4;
    unsigned workers = 1;
    unsigned qubit_ceiling = 26; // two buffers of 2^26 amplitudes = 2 GiB
    bool check_norms = true;     // assert sum |psi|^2 = 1 within 1e-9 per stage
};

// One full t-stage iterative circuit. Randomness is addressed by
// (problem seed, bitstring_index, stage, draw), so runs replay exactly and
// shard/worker counts cannot shift the stream.
RunResult run_iterative_shor(const FactoringProblem& problem, const ErrorConfig& error,
                             u64 seed, u64 bitstring_index, const SimulatorOptions& options);

// Reusable engine: per-problem permutation tables are built once and shared
// by all bitstrings of that problem.
class IterativeShorEngine {
public:
    IterativeShorEngine(const FactoringProblem& problem, const ErrorConfig& error,
                        const SimulatorOptions& options);
    RunResult run(u64 seed, u64 bitstring_index);

    const std::vector<u64>& stage_multipliers() const { return a_pows_; }

private:
    FactoringProblem problem_;
    ErrorConfig error_;
    SimulatorOptions options_;
    unsigned n_;
    u64 y_limit_;
    std::vector<u64> a_pows_;               // a^(2^(t-1-s)) mod N per stage
    std::vector<const std::vector<u32>*> stage_gather_; // per stage, null = identity
    std::map<u64, std::vector<u32>> gather_cache_;      // keyed by a_pow
    // Buffers: amplitudes of group 0/1 plus a group-1 staging array, all laid
    // out shard-contiguously (the class owns plain vectors; ShardedState
    // semantics are preserved by construction).
    std::vector<cplx> g0_, g1_, staging_;
    std::vector<double> block_sums_;
};

// Exact distribution over observed bitstrings by path enumeration,
// marginalizing error branches. Bounded by node budget (throws
// BudgetExceededError); requires t <= 14 and n <= 12.
std::vector<double> exhaustive_joint_distribution(const FactoringProblem& problem,
                                                  const ErrorConfig& error,
                                                  u64 node_budget = u64{1} << 22);

} // namespace shorsim
