#include <catch2/catch_amalgamated.hpp>

#include "psinar/thinning.hpp"

#include "oracles.hpp"

#include <cmath>

using namespace psinar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using test_support::all_families;
using test_support::convolution_oracle;

TEST_CASE("thinning zero gives zero", "[thinning]") {
    Rng rng(1);
    for (const auto& family : all_families()) {
        for (int i = 0; i < 100; ++i) CHECK(thin(family, 0.6, 0, rng) == 0);
        CHECK(thinned_pmf(family, 0.6, 0, 0) == 1.0);
        CHECK(thinned_pmf(family, 0.6, 0, 1) == 0.0);
        CHECK(thinned_pmf(family, 0.6, 0, 5) == 0.0);
    }
}

TEST_CASE("thinned_pmf hand values", "[thinning]") {
    CHECK_THAT(thinned_pmf(ThinningFamily::bernoulli(), 0.5, 1, 0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(thinned_pmf(ThinningFamily::poisson(), 0.5, 2, 0), WithinAbs(std::exp(-1.0), 1e-15));
    // NB(x, 1/(1+alpha)) at x = 2, m = 1.
    CHECK_THAT(thinned_pmf(ThinningFamily::geometric(), 0.5, 2, 1),
               WithinAbs(2.0 * std::pow(1 / 1.5, 2) * (0.5 / 1.5), 1e-15));
    CHECK_THROWS_AS(thinned_pmf(ThinningFamily::bernoulli(), 1.2, 3, 1), std::invalid_argument);
}

TEST_CASE("thinned_pmf equals the x-fold convolution of the counting law", "[thinning][oracle]") {
    for (const auto& family : all_families()) {
        for (double alpha : {0.2, 0.7}) {
            for (int x = 1; x <= 7; ++x) {
                const auto oracle = convolution_oracle(family, alpha, x, 150);
                const auto vec = thinned_pmf_vector(family, alpha, x, 150);
                for (int m = 0; m <= 150; ++m) {
                    INFO(family.name() << " alpha=" << alpha << " x=" << x << " m=" << m);
                    REQUIRE_THAT(thinned_pmf(family, alpha, x, m), WithinAbs(oracle[m], 1e-10));
                    REQUIRE_THAT(vec[m], WithinAbs(oracle[m], 1e-10));
                    if (oracle[m] > 1e-300) {
                        REQUIRE_THAT(thinned_log_pmf(family, alpha, x, m),
                                     WithinAbs(std::log(oracle[m]), 1e-8));
                    }
                }
            }
        }
    }
}

TEST_CASE("thinned law moments are alpha x and delta x", "[thinning]") {
    for (const auto& family : all_families()) {
        for (double alpha : {0.2, 0.7}) {
            for (Count x : {1, 3, 7, 40}) {
                double mass = 0.0, mean = 0.0, m2 = 0.0;
                const auto pmf = thinned_pmf_vector(family, alpha, x, 800);
                for (Count m = 0; m <= 800; ++m) {
                    const double p = pmf[m];
                    mass += p;
                    mean += m * p;
                    m2 += double(m) * m * p;
                }
                INFO(family.name() << " alpha=" << alpha << " x=" << x);
                CHECK_THAT(mass, WithinAbs(1.0, 1e-9));
                CHECK_THAT(mean, WithinAbs(alpha * x, 1e-9));
                CHECK_THAT(m2 - mean * mean, WithinAbs(family.delta(alpha) * x, 1e-8));
                const ThinnedLaw law(family, alpha, x);
                CHECK_THAT(law.mean(), WithinAbs(alpha * x, 1e-12));
                CHECK_THAT(law.variance(), WithinAbs(family.delta(alpha) * x, 1e-12));
            }
        }
    }
}

TEST_CASE("thinned support", "[thinning]") {
    for (Count x : {1, 4}) {
        for (Count m = x + 1; m < x + 20; ++m) {
            CHECK(thinned_pmf(ThinningFamily::bernoulli(), 0.4, x, m) == 0.0);
            CHECK(thinned_log_pmf(ThinningFamily::bernoulli(), 0.4, x, m) == kNegInf);
        }
        for (Count m = 0; m < 60; ++m) {
            CHECK(thinned_pmf(ThinningFamily::geometric(), 0.4, x, m) > 0.0);
            CHECK(thinned_pmf(ThinningFamily::poisson(), 0.4, x, m) > 0.0);
        }
    }
    CHECK(thinned_pmf(test_support::binomial2(), 0.4, 3, 7) == 0.0);
    CHECK(thinned_pmf(test_support::binomial2(), 0.4, 3, 6) > 0.0);
}

TEST_CASE("thinned log pmf stays finite for large states", "[thinning]") {
    for (const auto& family :
         {ThinningFamily::bernoulli(), ThinningFamily::geometric(), ThinningFamily::poisson()}) {
        const double lp = thinned_log_pmf(family, 0.3, 500, 150);
        CHECK(std::isfinite(lp));
        CHECK(lp < 0.0);
    }
}

TEST_CASE("thin samples match the conditional moments", "[thinning][mc]") {
    Rng rng(2024);
    constexpr int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(thin(ThinningFamily::bernoulli(), 0.5, 10, rng));
    CHECK(std::abs(sum / n - 5.0) < 3.0 * std::sqrt(2.5 / n));

    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = static_cast<double>(thin(ThinningFamily::geometric(), 0.5, 4, rng));
        s1 += v;
        s2 += v * v;
    }
    const double mean = s1 / n;
    const double var = (s2 - n * mean * mean) / (n - 1);
    CHECK_THAT(var, WithinRel(3.0, 0.05));

    for (const auto& family : {test_support::binomial2(), test_support::negative_binomial2()}) {
        double t = 0.0;
        for (int i = 0; i < 20000; ++i) t += static_cast<double>(thin(family, 0.6, 5, rng));
        CHECK(std::abs(t / 20000 - 3.0) < 4.0 * std::sqrt(family.delta(0.6) * 5 / 20000));
    }
}
