#pragma once

#include <complex>
#include <optional>
#include <string>

#include "shorsim/errors.hpp"
#include "shorsim/int128.hpp"
#include "shorsim/rng.hpp"

namespace shorsim {

enum class ErrorKind {
    none,
    amplitude_init,
    phase_init,
    classical_measure,
    quantum_measure,
    bitflip,
};

struct PauliProbs {
    double px = 0.0;
    double py = 0.0;
    double pz = 0.0;
};

// Exactly one error model is active per run; quantum_measure carries the
// Pauli triple with delta = px + py.
struct ErrorConfig {
    ErrorKind kind = ErrorKind::none;
    double delta = 0.0;
    std::optional<PauliProbs> pauli;

    static ErrorConfig none_config() { return {}; }
    void validate() const;
};

// Parses the CLI grammar, e.g. "kind=quantum_measure,px=0.005,py=0.005" or
// "kind=amplitude_init,delta=0.1". Throws ConfigError.
ErrorConfig parse_error_config(const std::string& text);
std::string error_kind_name(ErrorKind kind);
ErrorKind error_kind_from_name(const std::string& name);

using Amplitude = std::complex<double>;
struct QubitPair {
    Amplitude a0;
    Amplitude a1;
};

// sqrt((1+delta)/2)|0> + sqrt((1-delta)/2)|1>
QubitPair plus_state_amplitude_error(double delta);
// (|0> + e^{i pi delta}|1>)/sqrt(2)
QubitPair plus_state_phase_error(double delta);

// The reinitialization state the configuration dictates for the recycled qubit.
QubitPair reinit_state(const ErrorConfig& config);

// Effective single-qubit error probability: the x-axis all error sweeps share.
double effective_error_probability(ErrorKind kind, double delta);
// Inverse map: the delta achieving a given effective error probability.
double delta_for_error_probability(ErrorKind kind, double p_error);

struct FlipResult {
    int observed;
    bool flipped;
};
// Misclassification of the measured bit with probability delta; the quantum
// state is left untouched.
FlipResult classical_flip(int bit, double delta, RngStream& rng);

enum class MeasureBranch { correct, error };
struct DepolarizingOutcome {
    int bit;
    MeasureBranch branch;
    double p_prime_1;      // sampling probability actually used for bit = 1
    double p_error_branch; // conditional error-branch probability
};
// Depolarizing channel at measurement: bit sampled with the perturbed
// probability, then the post-measurement branch selected.
DepolarizingOutcome depolarizing_measure_branch(double p1, const PauliProbs& pauli,
                                                RngStream& rng);

// Flip each of the t bits of j independently with probability delta.
u128 bitflip_bitstring(u128 j, unsigned t, double delta, RngStream& rng);

} // namespace shorsim
