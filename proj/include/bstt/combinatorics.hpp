#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace bstt {

/// Exact binomial coefficient; 0 when k < 0 or k > n. Throws on int64 overflow.
inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
    if (k < 0 || k > n || n < 0) return 0;
    k = std::min(k, n - k);
    std::int64_t result = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        __int128 next = static_cast<__int128>(result) * (n - k + i);
        next /= i;  // exact: result * (n-k+1..n-k+i) / i! is integral at each step
        if (next > INT64_MAX) throw std::overflow_error("binomial overflow");
        result = static_cast<std::int64_t>(next);
    }
    return result;
}

/// multinomial(n; k_1,...,k_m) with sum k_i = n, via a product of binomials.
inline std::int64_t multinomial(std::int64_t n, std::span<const std::int64_t> parts) {
    std::int64_t sum = 0, result = 1;
    for (std::int64_t k : parts) {
        if (k < 0) throw std::invalid_argument("multinomial: negative part");
        sum += k;
        __int128 next = static_cast<__int128>(result) * binomial(sum, k);
        if (next > INT64_MAX) throw std::overflow_error("multinomial overflow");
        result = static_cast<std::int64_t>(next);
    }
    if (sum != n) throw std::invalid_argument("multinomial: parts do not sum to n");
    return result;
}

/// Exact integer power with overflow check.
inline std::int64_t ipow(std::int64_t base, std::int64_t exp) {
    if (exp < 0) throw std::invalid_argument("ipow: negative exponent");
    std::int64_t r = 1;
    for (std::int64_t i = 0; i < exp; ++i) {
        __int128 next = static_cast<__int128>(r) * base;
        if (next > INT64_MAX) throw std::overflow_error("ipow overflow");
        r = static_cast<std::int64_t>(next);
    }
    return r;
}

}  // namespace bstt
