#pragma once

#include <stdexcept>
#include <string>

namespace shorsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// gcd(a, N) != 1; the gcd itself is a nontrivial factor the caller should report.
struct NotInvertibleError : Error {
    NotInvertibleError(std::uint64_t a, std::uint64_t n, std::uint64_t g)
        : Error("not invertible: gcd(" + std::to_string(a) + ", " + std::to_string(n) +
                ") = " + std::to_string(g)),
          gcd(g) {}
    std::uint64_t gcd;
};

struct FactorizationTimeoutError : Error {
    using Error::Error;
};

struct DegenerateBranchError : Error {
    using Error::Error;
};

struct BudgetExceededError : Error {
    using Error::Error;
};

struct NoSolutionError : Error {
    using Error::Error;
};

struct CeilingExceededError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace shorsim
