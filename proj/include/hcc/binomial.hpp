#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace hcc {

// Exact C(n, k) as a 64-bit integer; valid well past n = 60 for the small
// shapes used here. Returns 0 outside the triangle.
inline std::uint64_t binomial_exact(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t result = 1;
    for (int i = 0; i < k; ++i) {
        result = result * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
    }
    return result;
}

// log C(n, k) via log-gamma, for log-domain tail assembly.
inline double log_binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) throw std::invalid_argument("log_binomial: k outside [0, n]");
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// C(n, k) in the caller's arithmetic type (double, multiprecision float).
// Iterative product; exact for the integer values that fit the type.
template <class Real>
Real binomial_as(int n, int k) {
    if (k < 0 || n < 0 || k > n) return Real(0);
    if (k > n - k) k = n - k;
    Real result(1);
    for (int i = 0; i < k; ++i) {
        result *= Real(n - i);
        result /= Real(i + 1);
    }
    return result;
}

}  // namespace hcc
