#include <catch2/catch_amalgamated.hpp>

#include "psinar/process.hpp"
#include "psinar/thinning.hpp"

#include "oracles.hpp"

#include <cmath>
#include <map>
#include <numeric>

using namespace psinar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

InarModel pl_model(ThinningFamily family, double alpha, double theta) {
    return InarModel(std::move(family), alpha, PoissonLindley(theta));
}

double pl_direct(long x, double theta) {
    return theta * theta * (x + theta + 2.0) / std::pow(theta + 1.0, x + 3.0);
}

// Linear-space kernel from the convolution oracle.
double transition_oracle(const InarModel& model, int l, int k) {
    const auto thinned = test_support::convolution_oracle(model.family(), model.alpha(), l, k);
    double p = 0.0;
    for (int m = 0; m <= k; ++m) p += thinned[m] * innovation_pmf(model.innovation(), k - m);
    return p;
}

std::vector<Count> simulate_series(const InarModel& model, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return simulate(model, n, kDefaultBurnIn, rng);
}

double sample_acf(const std::vector<Count>& xs, std::size_t lag) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = static_cast<double>(xs[i]) - mean;
        den += d * d;
        if (i >= lag) num += d * (static_cast<double>(xs[i - lag]) - mean);
    }
    return num / den;
}

}  // namespace

TEST_CASE("CountSeries validation", "[process]") {
    CHECK_THROWS_AS(CountSeries({1}), std::invalid_argument);
    CHECK_THROWS_AS(CountSeries({1, -2, 3}), std::invalid_argument);
    const CountSeries s({3, 0, 7});
    CHECK(s.size() == 3);
    CHECK(s.max() == 7);
    CHECK(s[2] == 7);
}

TEST_CASE("InarModel rejects alpha outside (0, 1)", "[process]") {
    for (double bad : {0.0, 1.0, -0.5, 2.0}) {
        CHECK_THROWS_AS(pl_model(ThinningFamily::bernoulli(), bad, 1.0), std::invalid_argument);
    }
}

TEST_CASE("model moments hand values", "[process]") {
    const auto m = model_moments(pl_model(ThinningFamily::bernoulli(), 0.5, 1.0));
    CHECK_THAT(m.mean, WithinAbs(3.0, 1e-14));
    CHECK_THAT(m.variance, WithinAbs(16.0 / 3.0, 1e-12));

    // Printed one-step start for the first data set, checked against the
    // range the mean takes over the four-digit rounding box of the inputs.
    double lo = 1e300, hi = -1e300;
    for (double a : {0.69415, 0.69425}) {
        for (double t : {0.28775, 0.28785}) {
            const double mean = model_moments(pl_model(ThinningFamily::poisson(), a, t)).mean;
            lo = std::min(lo, mean);
            hi = std::max(hi, mean);
        }
    }
    CHECK(lo <= 20.187);
    CHECK(20.187 <= hi);

    for (const auto& family : test_support::all_families()) {
        for (double alpha : {0.2, 0.5, 0.9}) {
            for (double theta : {0.3, 1.0, 5.0}) {
                const auto mm = model_moments(pl_model(family, alpha, theta));
                CHECK(mm.variance > mm.mean);
            }
        }
    }
}

TEST_CASE("autocorrelation and conditional moments", "[process]") {
    const auto model = pl_model(ThinningFamily::bernoulli(), 0.5, 1.0);
    CHECK(autocorrelation(model, 0) == 1.0);
    CHECK_THAT(autocorrelation(model, 3), WithinAbs(0.125, 1e-15));
    const auto c0 = conditional_moments(model, 0);
    CHECK_THAT(c0.mean, WithinAbs(1.5, 1e-15));
    CHECK_THAT(c0.variance, WithinAbs(3.25, 1e-15));
    const auto c4 = conditional_moments(model, 4);
    CHECK_THAT(c4.mean, WithinAbs(3.5, 1e-15));
    CHECK_THAT(c4.variance, WithinAbs(4.25, 1e-15));
}

TEST_CASE("simulate is deterministic and matches the stationary moments", "[process][mc]") {
    const auto model = pl_model(ThinningFamily::bernoulli(), 0.5, 1.0);
    CHECK(simulate_series(model, 500, 7) == simulate_series(model, 500, 7));
    CHECK(simulate_series(model, 500, 7) != simulate_series(model, 500, 8));

    const auto xs = simulate_series(model, 100000, 11);
    REQUIRE(xs.size() == 100000);
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (Count x : xs) ss += (x - mean) * (x - mean);
    CHECK_THAT(mean, WithinAbs(3.0, 0.05));
    CHECK_THAT(ss / (n - 1), WithinAbs(16.0 / 3.0, 0.2));

    const auto indep = simulate_series(pl_model(ThinningFamily::bernoulli(), 1e-9, 1.0), 100000, 3);
    const double m0 = std::accumulate(indep.begin(), indep.end(), 0.0) / 1e5;
    CHECK(std::abs(m0 - 1.5) < 3.0 * std::sqrt(3.25 / 1e5));
}

TEST_CASE("simulated autocorrelation follows alpha^k", "[process][mc]") {
    for (const auto& family :
         {ThinningFamily::bernoulli(), ThinningFamily::geometric(), ThinningFamily::poisson()}) {
        for (double alpha : {0.3, 0.7}) {
            const auto xs = simulate_series(pl_model(family, alpha, 1.0), 100000, 21);
            INFO(family.name() << " alpha=" << alpha);
            for (std::size_t k = 1; k <= 3; ++k) {
                CHECK_THAT(sample_acf(xs, k), WithinAbs(std::pow(alpha, double(k)), 0.02));
            }
        }
    }
}

TEST_CASE("transition_prob hand values", "[process]") {
    const auto bern = pl_model(ThinningFamily::bernoulli(), 0.5, 1.0);
    CHECK_THAT(transition_prob(bern, 1, 0), WithinAbs(0.1875, 1e-15));
    const auto pois = pl_model(ThinningFamily::poisson(), 0.5, 1.0);
    CHECK_THAT(transition_prob(pois, 2, 0), WithinAbs(std::exp(-1.0) * 0.375, 1e-15));
    for (const auto& family : test_support::all_families()) {
        const auto model = pl_model(family, 0.4, 0.8);
        for (Count k = 0; k < 20; ++k) {
            CHECK_THAT(transition_prob(model, 0, k), WithinRel(pl_direct(k, 0.8), 1e-12));
        }
    }
}

TEST_CASE("transition_prob matches the linear-space convolution oracle", "[process][oracle]") {
    const std::vector<InnovationSpec> innovations{PoissonLindley(0.7), PoissonInnovation(1.3),
                                                  GeometricInnovation(0.4)};
    for (const auto& family : test_support::all_families()) {
        for (const auto& innovation : innovations) {
            const InarModel model(family, 0.35, innovation);
            for (int l = 0; l <= 7; ++l) {
                for (int k = 0; k <= 25; ++k) {
                    INFO(family.name() << " l=" << l << " k=" << k);
                    REQUIRE_THAT(transition_prob(model, l, k),
                                 WithinAbs(transition_oracle(model, l, k), 1e-12));
                }
            }
        }
    }
}

TEST_CASE("transition rows are normalized and carry the conditional moments", "[process]") {
    const std::vector<InnovationSpec> innovations{PoissonLindley(0.7), PoissonLindley(2.0),
                                                  PoissonInnovation(1.3), GeometricInnovation(0.4)};
    for (const auto& family : test_support::all_families()) {
        for (const auto& innovation : innovations) {
            const InarModel model(family, 0.6, innovation);
            for (Count l : {0, 1, 5, 20}) {
                const Count cap = default_cap(model, l) + 100;
                const TransitionRow row = transition_row(model, l, cap);
                REQUIRE(row.probs.size() == static_cast<std::size_t>(cap + 1));
                double total = row.tail, m1 = 0.0, m2 = 0.0;
                for (std::size_t k = 0; k < row.probs.size(); ++k) {
                    REQUIRE(row.probs[k] >= 0.0);
                    total += row.probs[k];
                    m1 += k * row.probs[k];
                    m2 += double(k) * k * row.probs[k];
                }
                INFO(family.name() << " l=" << l);
                CHECK_THAT(total, WithinAbs(1.0, 1e-12));
                CHECK(row.tail < 1e-12);
                const Moments cm = conditional_moments(model, l);
                CHECK_THAT(m1, WithinAbs(cm.mean, 1e-6));
                CHECK_THAT(m2 - m1 * m1, WithinAbs(cm.variance, 1e-6));
            }
            const TransitionRow zero = transition_row(model, 0, 30);
            for (Count k = 0; k <= 30; ++k) {
                CHECK_THAT(zero.probs[k], WithinRel(innovation_pmf(innovation, k), 1e-12));
            }
        }
    }
}

TEST_CASE("short caps leave the missing mass in the tail", "[process]") {
    const auto model = pl_model(ThinningFamily::geometric(), 0.8, 0.3);
    const TransitionRow row = transition_row(model, 10, 5);
    const double head = std::accumulate(row.probs.begin(), row.probs.end(), 0.0);
    CHECK(row.tail > 0.1);
    CHECK_THAT(head + row.tail, WithinAbs(1.0, 1e-12));
    CHECK(default_cap(model, 0) >= 50);
}

TEST_CASE("empirical transitions match the kernel", "[process][mc]") {
    const auto model = pl_model(ThinningFamily::bernoulli(), 0.5, 1.0);
    const auto xs = simulate_series(model, 1000000, 5);
    std::map<Count, std::map<Count, long>> counts;
    std::map<Count, long> visits;
    for (std::size_t t = 1; t < xs.size(); ++t) {
        ++counts[xs[t - 1]][xs[t]];
        ++visits[xs[t - 1]];
    }
    int checked = 0;
    for (const auto& [l, n] : visits) {
        if (n < 500) continue;
        for (Count k = 0; k <= l + 12; ++k) {
            const double p = transition_prob(model, l, k);
            if (n * p < 5.0) continue;  // normal approximation needs a few expected hits
            const double freq = static_cast<double>(counts[l][k]) / n;
            const double se = std::sqrt(p * (1.0 - p) / n);
            INFO("l=" << l << " k=" << k << " n=" << n);
            CHECK(std::abs(freq - p) <= 3.0 * se);
            ++checked;
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("log_likelihood", "[process]") {
    const auto bern = pl_model(ThinningFamily::bernoulli(), 0.5, 1.0);
    CHECK_THAT(log_likelihood(bern, CountSeries({1, 0})), WithinAbs(std::log(0.1875), 1e-14));
    for (Count k : {0, 3, 17}) {
        CHECK_THAT(log_likelihood(bern, CountSeries({0, k})),
                   WithinAbs(std::log(pl_direct(k, 1.0)), 1e-12));
    }
    for (const auto& family : test_support::all_families()) {
        const auto model = pl_model(family, 0.45, 0.6);
        const auto xs = simulate_series(model, 15, 77);
        double product = 1.0;
        for (std::size_t t = 1; t < xs.size(); ++t) {
            product *= transition_oracle(model, static_cast<int>(xs[t - 1]), static_cast<int>(xs[t]));
        }
        CHECK_THAT(std::exp(log_likelihood(model, CountSeries(xs))), WithinRel(product, 1e-10));
    }
}

TEST_CASE("log_likelihood stays finite on large counts", "[process]") {
    std::vector<Count> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(5 + (i * 37) % 40);
    xs.push_back(0);
    xs.push_back(120);
    for (const auto& family :
         {ThinningFamily::bernoulli(), ThinningFamily::geometric(), ThinningFamily::poisson()}) {
        const double ll = log_likelihood(pl_model(family, 0.6942, 0.2878), CountSeries(xs));
        CHECK(std::isfinite(ll));
        CHECK(ll < 0.0);
    }
}

TEST_CASE("stationary distribution reproduces the stationary moments", "[process]") {
    const auto model = pl_model(ThinningFamily::bernoulli(), 0.5, 1.0);
    const double tol = 1e-12;
    const auto dist = stationary_distribution(model, 60, tol);
    REQUIRE(dist.size() == 61);
    CHECK_THAT(std::accumulate(dist.begin(), dist.end(), 0.0), WithinAbs(1.0, 1e-12));
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        m1 += k * dist[k];
        m2 += double(k) * k * dist[k];
    }
    const Moments mm = model_moments(model);
    CHECK_THAT(m1, WithinRel(mm.mean, 0.01));
    CHECK_THAT(m2 - m1 * m1, WithinRel(mm.variance, 0.02));

    // One more application of the renormalized kernel changes it by less than tol.
    std::vector<double> next(dist.size(), 0.0);
    for (Count l = 0; l <= 60; ++l) {
        const TransitionRow row = transition_row(model, l, 60);
        const double mass = std::accumulate(row.probs.begin(), row.probs.end(), 0.0);
        for (Count k = 0; k <= 60; ++k) next[k] += dist[l] * row.probs[k] / mass;
    }
    double tv = 0.0;
    for (std::size_t k = 0; k < dist.size(); ++k) tv += std::abs(next[k] - dist[k]);
    CHECK(0.5 * tv < tol);

    CHECK_THROWS_AS(stationary_distribution(model, 10, tol), std::invalid_argument);
    CHECK_THROWS_AS(stationary_distribution(model, 60, 1e-300, 3), ConvergenceError);
}

TEST_CASE("joint_log_pmf", "[process]") {
    const auto model = pl_model(ThinningFamily::geometric(), 0.4, 1.2);
    const auto dist = stationary_distribution(model, 80, 1e-13);
    const std::vector<Count> single{4};
    CHECK_THAT(joint_log_pmf(model, single, dist), WithinAbs(std::log(dist[4]), 1e-14));

    std::vector<double> point(5, 0.0);
    point[0] = 1.0;
    const std::vector<Count> zeros{0, 0};
    CHECK_THAT(joint_log_pmf(model, zeros, point), WithinAbs(std::log(pl_direct(0, 1.2)), 1e-13));

    const std::vector<Count> xs{2, 5, 1, 0, 3, 3};
    const double whole = joint_log_pmf(model, xs, dist);
    const std::vector<Count> prefix(xs.begin(), xs.begin() + 3);
    double suffix = 0.0;
    for (std::size_t t = 3; t < xs.size(); ++t) suffix += log_transition_prob(model, xs[t - 1], xs[t]);
    CHECK_THAT(whole, WithinAbs(joint_log_pmf(model, prefix, dist) + suffix, 1e-12));

    const std::vector<Count> outside{200, 1};
    CHECK_THROWS_AS(joint_log_pmf(model, outside, dist), std::invalid_argument);
}
