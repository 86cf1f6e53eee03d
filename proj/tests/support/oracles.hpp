#pragma once

#include "psinar/distributions.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace test_support {

// Binomial(2, alpha / 2) as a power series law.
inline psinar::ThinningFamily binomial2() {
    return psinar::ThinningFamily::power_series(
        {[](psinar::Count y) { return y == 1 ? 2.0 : (y == 0 || y == 2 ? 1.0 : 0.0); },
         [](double b) { return (1.0 + b) * (1.0 + b); },
         std::numeric_limits<double>::infinity(), psinar::Count{2}});
}

// Negative binomial with r = 2.
inline psinar::ThinningFamily negative_binomial2() {
    return psinar::ThinningFamily::power_series(
        {[](psinar::Count y) { return static_cast<double>(y + 1); },
         [](double b) { return 1.0 / ((1.0 - b) * (1.0 - b)); }, 1.0, std::nullopt});
}

inline std::vector<psinar::ThinningFamily> all_families() {
    return {psinar::ThinningFamily::bernoulli(), psinar::ThinningFamily::geometric(),
            psinar::ThinningFamily::poisson(), binomial2(), negative_binomial2()};
}

// x-fold convolution of the counting pmf, truncated at n_max.
inline std::vector<double> convolution_oracle(const psinar::ThinningFamily& family, double alpha,
                                              int x, int n_max) {
    std::vector<double> single(n_max + 1);
    for (int y = 0; y <= n_max; ++y) single[y] = psinar::counting_pmf(family, alpha, y);
    std::vector<double> acc(n_max + 1, 0.0);
    acc[0] = 1.0;
    for (int i = 0; i < x; ++i) {
        std::vector<double> next(n_max + 1, 0.0);
        for (int m = 0; m <= n_max; ++m) {
            for (int y = 0; y <= m; ++y) next[m] += acc[m - y] * single[y];
        }
        acc = std::move(next);
    }
    return acc;
}

// Minimizer of S_n(alpha, b) = sum_t (x_t - alpha x_{t-1} - b)^2 by Newton
// steps with central-difference derivatives; exact for a quadratic. Returns
// (alpha, mu) with mu = b / (1 - alpha).
template <class Series>
std::pair<double, double> minimize_sn(const Series& s) {
    auto sn = [&s](double a, double b) {
        double acc = 0.0;
        for (std::size_t t = 1; t < s.size(); ++t) {
            const double r = static_cast<double>(s[t]) - a * static_cast<double>(s[t - 1]) - b;
            acc += r * r;
        }
        return acc;
    };
    double a = 0.5, b = 1.0;
    const double h = 1e-2;
    for (int it = 0; it < 4; ++it) {
        const double ga = (sn(a + h, b) - sn(a - h, b)) / (2 * h);
        const double gb = (sn(a, b + h) - sn(a, b - h)) / (2 * h);
        const double haa = (sn(a + h, b) - 2 * sn(a, b) + sn(a - h, b)) / (h * h);
        const double hbb = (sn(a, b + h) - 2 * sn(a, b) + sn(a, b - h)) / (h * h);
        const double hab =
            (sn(a + h, b + h) - sn(a + h, b - h) - sn(a - h, b + h) + sn(a - h, b - h)) / (4 * h * h);
        const double det = haa * hbb - hab * hab;
        a -= (hbb * ga - hab * gb) / det;
        b -= (haa * gb - hab * ga) / det;
    }
    return {a, b / (1.0 - a)};
}

}  // namespace test_support
