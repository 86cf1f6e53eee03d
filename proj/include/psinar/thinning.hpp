#pragma once

#include "psinar/distributions.hpp"

#include <vector>

namespace psinar {

/**
 * @brief Power-series thinning: alpha o x = Y_1 + ... + Y_x.
 *
 * Built-in families draw once from the closed-form law of the sum,
 * Binomial(x, alpha), NB(x, 1/(1+alpha)) or Poisson(alpha x); custom
 * power-series families sum x iid counting variates.
 */
Count thin(const ThinningFamily& family, double alpha, Count x, Rng& rng);

/// P(alpha o X = m | X = x).
double thinned_pmf(const ThinningFamily& family, double alpha, Count x, Count m);
double thinned_log_pmf(const ThinningFamily& family, double alpha, Count x, Count m);

/**
 * P(alpha o X = m | X = x) for m = 0..max_m.
 *
 * Custom families use the x-fold convolution of the counting pmf restricted
 * to {0..max_m}, which is exact on that range.
 */
std::vector<double> thinned_pmf_vector(const ThinningFamily& family, double alpha, Count x,
                                       Count max_m);

/// Conditional law of alpha o X given X = x.
class ThinnedLaw {
public:
    ThinnedLaw(ThinningFamily family, double alpha, Count x);

    [[nodiscard]] double mean() const noexcept { return alpha_ * static_cast<double>(x_); }
    [[nodiscard]] double variance() const { return family_.delta(alpha_) * static_cast<double>(x_); }
    [[nodiscard]] double pmf(Count m) const { return thinned_pmf(family_, alpha_, x_, m); }
    [[nodiscard]] double log_pmf(Count m) const { return thinned_log_pmf(family_, alpha_, x_, m); }

    [[nodiscard]] const ThinningFamily& family() const noexcept { return family_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] Count x() const noexcept { return x_; }

private:
    ThinningFamily family_;
    double alpha_;
    Count x_;
};

}  // namespace psinar
