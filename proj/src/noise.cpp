#include "shorsim/noise.hpp"

#include <cmath>
#include <sstream>

namespace shorsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInvSqrt2 = 0.70710678118654752440;
} // namespace

void ErrorConfig::validate() const {
    if (delta < 0.0 || delta > 1.0) throw ConfigError("error config: delta outside [0, 1]");
    if (kind == ErrorKind::quantum_measure) {
        if (!pauli) throw ConfigError("quantum_measure requires px/py(/pz)");
        if (pauli->px < 0 || pauli->py < 0 || pauli->pz < 0 ||
            pauli->px + pauli->py + pauli->pz > 1.0)
            throw ConfigError("error config: invalid Pauli probabilities");
        double d = pauli->px + pauli->py;
        if (std::abs(d - delta) > 1e-12) throw ConfigError("quantum_measure: delta != px + py");
    } else if (pauli) {
        throw ConfigError("error config: pauli probabilities only apply to quantum_measure");
    }
}

std::string error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::none: return "none";
        case ErrorKind::amplitude_init: return "amplitude_init";
        case ErrorKind::phase_init: return "phase_init";
        case ErrorKind::classical_measure: return "classical_measure";
        case ErrorKind::quantum_measure: return "quantum_measure";
        case ErrorKind::bitflip: return "bitflip";
    }
    throw ConfigError("unknown error kind");
}

ErrorKind error_kind_from_name(const std::string& name) {
    for (ErrorKind k : {ErrorKind::none, ErrorKind::amplitude_init, ErrorKind::phase_init,
                        ErrorKind::classical_measure, ErrorKind::quantum_measure,
                        ErrorKind::bitflip}) {
        if (error_kind_name(k) == name) return k;
    }
    throw ConfigError("unknown error kind: " + name);
}

ErrorConfig parse_error_config(const std::string& text) {
    ErrorConfig config;
    double px = -1, py = -1, pz = 0, delta = -1;
    std::string kind;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError("error config: expected key=value: " + item);
        std::string key = item.substr(0, eq), value = item.substr(eq + 1);
        if (key == "kind") kind = value;
        else if (key == "delta") delta = std::stod(value);
        else if (key == "px") px = std::stod(value);
        else if (key == "py") py = std::stod(value);
        else if (key == "pz") pz = std::stod(value);
        else throw ConfigError("error config: unknown key: " + key);
    }
    if (kind.empty()) throw ConfigError("error config: missing kind");
    config.kind = error_kind_from_name(kind);
    if (config.kind == ErrorKind::quantum_measure) {
        if (px < 0 || py < 0) throw ConfigError("quantum_measure: need px and py");
        config.pauli = PauliProbs{px, py, pz};
        config.delta = px + py; // delta derived
        if (delta >= 0 && std::abs(delta - config.delta) > 1e-12)
            throw ConfigError("quantum_measure: delta != px + py");
    } else if (config.kind != ErrorKind::none) {
        if (delta < 0) throw ConfigError("error config: missing delta");
        config.delta = delta;
    }
    config.validate();
    return config;
}

QubitPair plus_state_amplitude_error(double delta) {
    return {std::sqrt((1.0 + delta) / 2.0), std::sqrt((1.0 - delta) / 2.0)};
}

QubitPair plus_state_phase_error(double delta) {
    return {kInvSqrt2, std::polar(kInvSqrt2, kPi * delta)};
}

QubitPair reinit_state(const ErrorConfig& config) {
    switch (config.kind) {
        case ErrorKind::amplitude_init: return plus_state_amplitude_error(config.delta);
        case ErrorKind::phase_init: return plus_state_phase_error(config.delta);
        default: return {kInvSqrt2, kInvSqrt2};
    }
}

double effective_error_probability(ErrorKind kind, double delta) {
    switch (kind) {
        case ErrorKind::amplitude_init: return (1.0 - std::sqrt(1.0 - delta * delta)) / 2.0;
        case ErrorKind::phase_init: return (1.0 - std::cos(kPi * delta)) / 2.0;
        case ErrorKind::classical_measure:
        case ErrorKind::quantum_measure:
        case ErrorKind::bitflip: return delta;
        case ErrorKind::none: return 0.0;
    }
    throw ConfigError("unknown error kind");
}

double delta_for_error_probability(ErrorKind kind, double p_error) {
    if (p_error < 0.0) throw ConfigError("negative error probability");
    switch (kind) {
        case ErrorKind::amplitude_init: {
            if (p_error > 0.5) throw ConfigError("amplitude_init: p_error <= 1/2");
            return 2.0 * std::sqrt(p_error * (1.0 - p_error));
        }
        case ErrorKind::phase_init: {
            if (p_error > 1.0) throw ConfigError("phase_init: p_error <= 1");
            return std::acos(1.0 - 2.0 * p_error) / kPi;
        }
        case ErrorKind::classical_measure:
        case ErrorKind::quantum_measure:
        case ErrorKind::bitflip: return p_error;
        case ErrorKind::none: return 0.0;
    }
    throw ConfigError("unknown error kind");
}

FlipResult classical_flip(int bit, double delta, RngStream& rng) {
    bool flip = rng.next_double() < delta;
    return {flip ? 1 - bit : bit, flip};
}

DepolarizingOutcome depolarizing_measure_branch(double p1, const PauliProbs& pauli,
                                                RngStream& rng) {
    double dxy = pauli.px + pauli.py; // pz leaves the sampling untouched
    double p1_prime = (1.0 - dxy) * p1 + dxy * (1.0 - p1);
    int bit = rng.next_double() < p1_prime ? 1 : 0;
    double p_bit = bit == 1 ? p1 : 1.0 - p1;
    double p_other = 1.0 - p_bit;
    double p_bit_prime = bit == 1 ? p1_prime : 1.0 - p1_prime;
    double p_error = p_bit_prime > 0.0 ? dxy * p_other / p_bit_prime : 0.0;
    MeasureBranch branch =
        rng.next_double() < p_error ? MeasureBranch::error : MeasureBranch::correct;
    return {bit, branch, p1_prime, p_error};
}

u128 bitflip_bitstring(u128 j, unsigned t, double delta, RngStream& rng) {
    for (unsigned i = 0; i < t; ++i)
        if (rng.next_double() < delta) j ^= u128{1} << i;
    return j;
}

} // namespace shorsim
