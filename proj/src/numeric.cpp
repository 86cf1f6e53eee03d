#include "psinar/numeric.hpp"

#include <algorithm>
#include <array>

namespace psinar {

namespace {

constexpr Count kTableSize = 4096;

const std::array<double, kTableSize>& log_factorial_table() {
    static const auto table = [] {
        std::array<double, kTableSize> t{};
        for (Count n = 0; n < kTableSize; ++n) t[n] = std::lgamma(static_cast<double>(n) + 1.0);
        return t;
    }();
    return table;
}

}  // namespace

double log_factorial(Count n) {
    if (n < kTableSize) return log_factorial_table()[static_cast<std::size_t>(n)];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(Count n, Count k) {
    if (k < 0 || k > n) return kNegInf;
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_sum_exp(std::span<const double> log_terms) noexcept {
    if (log_terms.empty()) return kNegInf;
    const double m = *std::max_element(log_terms.begin(), log_terms.end());
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : log_terms) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace psinar
