#pragma once

#include <optional>
#include <string>
#include <vector>

#include "shorsim/int128.hpp"
#include "shorsim/rng.hpp"

namespace shorsim {

// One factoring instance: semiprime N = p*q, base a coprime to N, bit length
// L of N, and t classical bits per bitstring. p and q ride along for
// verification only; the pipeline itself never consumes them.
struct FactoringProblem {
    u64 N = 15;
    u64 a = 7;
    unsigned L = 4;  // floor(log2 N) + 1
    unsigned t = 8;
    std::optional<u64> p;
    std::optional<u64> q;
    u64 seed = 0;

    unsigned qubits() const { return L + 1; }
};

struct SemiprimeRecord {
    unsigned n_qubits; // row index: qubits needed by the iterative circuit
    u64 N;
    u64 p;
    u64 q;
    unsigned t_recommended;
};

unsigned bit_length_u64(u64 n);

// Smallest t with 2^t >= N^2 (equivalently ceil(2 log2 N)).
unsigned recommended_t(u64 n);

// Uniform semiprime problem: p uniform over odd candidates in
// {3..floor(sqrt(2^L))} until prime, q uniform over {ceil(2^(L-1)/p) ..
// floor(2^L/p)} until prime with q > p, then a uniform coprime base.
FactoringProblem generate_uniform_problem(unsigned L, u64 seed);

// Largest semiprime with two distinct, equal-digit-count prime factors that
// an n_qubits-qubit iterative circuit can factor (i.e. the largest such
// N < 2^(n_qubits - 1)). Returns nullopt when none exists (n_qubits < 5).
std::optional<SemiprimeRecord> largest_interesting_semiprime(unsigned n_qubits);

struct BasePick {
    u64 a;
    std::optional<u64> incidental_factor; // gcd(candidate, N) > 1 hit along the way
};
BasePick pick_base(u64 n, RngStream& rng);

// Line-delimited problem manifest (decimal text, first line is the schema).
std::string problem_to_json(const FactoringProblem& p);
FactoringProblem problem_from_json(const std::string& line);
void write_problem_manifest(const std::string& path, const std::vector<FactoringProblem>& problems);
std::vector<FactoringProblem> read_problem_manifest(const std::string& path);

} // namespace shorsim
