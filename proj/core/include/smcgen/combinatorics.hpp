#pragma once

#include <cstdint>

#include "smcgen/errors.hpp"

namespace smcgen {

// Falling factorial (x)_b = x (x-1) ... (x-b+1); the empty product is 1.
// Values stay exact for the count magnitudes this library works with
// (x <= 2^15, b <= 4 fits comfortably in 64 bits).
inline std::int64_t falling_factorial(std::int64_t x, int b) {
    if (b < 0) throw InputError("falling_factorial: negative order");
    std::int64_t result = 1;
    for (int k = 0; k < b; ++k) result *= x - k;
    return result;
}

inline std::int64_t binomial_pairs(std::int64_t k) { return k * (k - 1) / 2; }

} // namespace smcgen
