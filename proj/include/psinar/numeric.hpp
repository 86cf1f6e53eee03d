#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace psinar {

/// Non-negative count value. Signed so that negative input can be rejected
/// instead of silently wrapping.
using Count = std::int64_t;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(n!) from a precomputed table for small n, lgamma beyond it.
double log_factorial(Count n);

/// log C(n, k); -inf when k is outside [0, n].
double log_binomial(Count n, Count k);

/**
 * Streaming log-sum-exp.
 *
 * Keeps the running maximum and a sum of exp(term - max), rescaling only
 * when a new maximum arrives. Adding -inf is a no-op.
 */
class LogSumExp {
public:
    void add(double log_term) noexcept {
        if (log_term == kNegInf) return;
        if (log_term <= max_) {
            sum_ += std::exp(log_term - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            max_ = log_term;
        }
    }

    [[nodiscard]] double value() const noexcept {
        return sum_ == 0.0 ? kNegInf : max_ + std::log(sum_);
    }

private:
    double max_ = kNegInf;
    double sum_ = 0.0;
};

double log_sum_exp(std::span<const double> log_terms) noexcept;

inline double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

inline double expit(double u) noexcept {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

}  // namespace psinar
