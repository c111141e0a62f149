#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "shorsim/int128.hpp"

namespace shorsim {

// Unbounded nonnegative integer, just big enough for order-recovery exponents:
// build by multiplying in 64-bit factors, shrink by exact small divisions, and
// feed the bits to modular exponentiation. Not a general bignum.
class BigUint {
public:
    BigUint() = default;
    explicit BigUint(u64 v) {
        if (v != 0) limbs_.push_back(v);
    }

    bool is_zero() const { return limbs_.empty(); }

    bool operator==(const BigUint& o) const { return limbs_ == o.limbs_; }

    unsigned bit_count() const {
        if (limbs_.empty()) return 0;
        return 64 * (static_cast<unsigned>(limbs_.size()) - 1) + bit_length(limbs_.back());
    }

    bool bit(unsigned i) const {
        unsigned w = i / 64;
        if (w >= limbs_.size()) return false;
        return (limbs_[w] >> (i % 64)) & 1;
    }

    void mul_u64(u64 f) {
        if (f == 0) { limbs_.clear(); return; }
        u128 carry = 0;
        for (auto& l : limbs_) {
            u128 cur = u128{l} * f + carry;
            l = static_cast<u64>(cur);
            carry = cur >> 64;
        }
        if (carry != 0) limbs_.push_back(static_cast<u64>(carry));
    }

    // Returns the remainder; quotient replaces *this.
    u64 divmod_u64(u64 d) {
        if (d == 0) throw std::invalid_argument("BigUint: division by zero");
        u128 rem = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            u128 cur = (rem << 64) | limbs_[i];
            limbs_[i] = static_cast<u64>(cur / d);
            rem = cur % d;
        }
        trim();
        return static_cast<u64>(rem);
    }

    bool divisible_by(u64 d) const {
        u128 rem = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;)
            rem = ((rem << 64) | limbs_[i]) % d;
        return rem == 0;
    }

    u64 as_u64() const {
        if (limbs_.size() > 1) throw std::overflow_error("BigUint: does not fit in 64 bits");
        return limbs_.empty() ? 0 : limbs_[0];
    }

    bool fits_u64() const { return limbs_.size() <= 1; }

    std::string to_string() const {
        if (limbs_.empty()) return "0";
        BigUint tmp = *this;
        std::string out;
        while (!tmp.is_zero()) {
            u64 part = tmp.divmod_u64(10'000'000'000'000'000'000ull);
            std::string chunk = std::to_string(part);
            if (!tmp.is_zero()) chunk = std::string(19 - chunk.size(), '0') + chunk;
            out = chunk + out;
        }
        return out;
    }

private:
    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    }
    std::vector<u64> limbs_; // little endian
};

} // namespace shorsim
