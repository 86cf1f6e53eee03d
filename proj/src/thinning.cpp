#include "psinar/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psinar {

namespace {

void require_counts(Count x, Count m) {
    if (x < 0 || m < 0) throw std::invalid_argument("counts must be non-negative");
}

std::vector<double> convolve_counting(const ThinningFamily& family, double alpha, Count x,
                                      Count max_m) {
    const std::size_t cap = static_cast<std::size_t>(max_m) + 1;
    std::size_t q_len = cap;
    if (auto top = family.max_support()) q_len = std::min<std::size_t>(q_len, *top + 1);
    std::vector<double> q(q_len);
    for (std::size_t y = 0; y < q_len; ++y) q[y] = family.pmf(alpha, static_cast<Count>(y));

    std::vector<double> dist{1.0};
    for (Count i = 0; i < x; ++i) {
        std::vector<double> next(std::min(cap, dist.size() + q.size() - 1), 0.0);
        for (std::size_t a = 0; a < dist.size(); ++a) {
            if (dist[a] == 0.0) continue;
            for (std::size_t b = 0; b < q.size() && a + b < next.size(); ++b) {
                next[a + b] += dist[a] * q[b];
            }
        }
        dist = std::move(next);
    }
    dist.resize(cap, 0.0);
    return dist;
}

}  // namespace

Count thin(const ThinningFamily& family, double alpha, Count x, Rng& rng) {
    require_alpha(alpha);
    if (x < 0) throw std::invalid_argument("x must be non-negative");
    if (x == 0) return 0;
    switch (family.kind()) {
        case ThinningFamily::Kind::Bernoulli:
            return std::binomial_distribution<Count>(x, alpha)(rng);
        case ThinningFamily::Kind::Geometric:
            return std::negative_binomial_distribution<Count>(x, 1.0 / (1.0 + alpha))(rng);
        case ThinningFamily::Kind::Poisson:
            return std::poisson_distribution<Count>(alpha * static_cast<double>(x))(rng);
        case ThinningFamily::Kind::PowerSeries: {
            Count total = 0;
            for (Count i = 0; i < x; ++i) total += family.sample(alpha, rng);
            return total;
        }
    }
    return 0;
}

double thinned_log_pmf(const ThinningFamily& family, double alpha, Count x, Count m) {
    require_alpha(alpha);
    require_counts(x, m);
    if (x == 0) return m == 0 ? 0.0 : kNegInf;
    const double xd = static_cast<double>(x);
    const double md = static_cast<double>(m);
    switch (family.kind()) {
        case ThinningFamily::Kind::Bernoulli:
            if (m > x) return kNegInf;
            return log_binomial(x, m) + md * std::log(alpha) + (xd - md) * std::log1p(-alpha);
        case ThinningFamily::Kind::Geometric:
            return log_binomial(x + m - 1, m) - xd * std::log1p(alpha) +
                   md * (std::log(alpha) - std::log1p(alpha));
        case ThinningFamily::Kind::Poisson:
            return -alpha * xd + md * std::log(alpha * xd) - log_factorial(m);
        case ThinningFamily::Kind::PowerSeries: {
            const double p = convolve_counting(family, alpha, x, m)[static_cast<std::size_t>(m)];
            return p > 0.0 ? std::log(p) : kNegInf;
        }
    }
    return kNegInf;
}

double thinned_pmf(const ThinningFamily& family, double alpha, Count x, Count m) {
    return std::exp(thinned_log_pmf(family, alpha, x, m));
}

std::vector<double> thinned_pmf_vector(const ThinningFamily& family, double alpha, Count x,
                                       Count max_m) {
    require_alpha(alpha);
    require_counts(x, max_m);
    if (family.kind() == ThinningFamily::Kind::PowerSeries) {
        return convolve_counting(family, alpha, x, max_m);
    }
    std::vector<double> out(static_cast<std::size_t>(max_m) + 1);
    for (Count m = 0; m <= max_m; ++m) out[m] = thinned_pmf(family, alpha, x, m);
    return out;
}

ThinnedLaw::ThinnedLaw(ThinningFamily family, double alpha, Count x)
    : family_(std::move(family)), alpha_(alpha), x_(x) {
    require_alpha(alpha);
    if (x < 0) throw std::invalid_argument("x must be non-negative");
}

}  // namespace psinar
