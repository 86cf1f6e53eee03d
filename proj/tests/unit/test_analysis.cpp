#include <catch2/catch_amalgamated.hpp>

#include "psinar/analysis.hpp"

#include <cmath>
#include <thread>

using namespace psinar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

CountSeries simulated(ThinningFamily family, double alpha, double theta, std::size_t n,
                      std::uint64_t seed) {
    Rng rng(seed);
    return CountSeries(simulate(InarModel(std::move(family), alpha, PoissonLindley(theta)), n, 300, rng));
}

// Interval of a function of (alpha, theta) over the rounding box of the inputs.
template <class F>
std::pair<double, double> rounding_range(F f, double alpha, double theta, double half_ulp_a,
                                         double half_ulp_t) {
    double lo = 1e300, hi = -1e300;
    for (double a : {alpha - half_ulp_a, alpha + half_ulp_a}) {
        for (double t : {theta - half_ulp_t, theta + half_ulp_t}) {
            lo = std::min(lo, f(a, t));
            hi = std::max(hi, f(a, t));
        }
    }
    return {lo, hi};
}

}  // namespace

TEST_CASE("information criteria", "[analysis]") {
    const auto ic = information_criteria(0.0, 2, std::exp(2.0));
    CHECK_THAT(ic.aic, WithinAbs(4.0, 1e-14));
    CHECK_THAT(ic.bic, WithinAbs(4.0, 1e-14));
    for (double n : {8.0, 50.0, 1000.0}) {
        const auto c = information_criteria(-120.0, 2, n);
        CHECK(c.bic > c.aic);
    }
    CHECK_THAT(information_criteria(-316.08, 2, 98).aic, WithinAbs(636.16, 1e-10));
    CHECK_THAT(information_criteria(-316.08, 2, 98).bic, WithinAbs(632.16 + 2 * std::log(98.0), 1e-10));
}

TEST_CASE("prediction identities of the three data analyses", "[analysis]") {
    struct Case {
        double alpha, theta, start, intercept, ulp_a, ulp_t, ulp_i;
    };
    // Values printed with the fitted models; inputs carry 2 to 4 decimals.
    const Case cases[] = {{0.6942, 0.2878, 20.187, 6.173, 5e-5, 5e-5, 5e-4},
                          {0.59, 1.6850, 1.986, 0.814, 5e-3, 5e-5, 5e-4},
                          {0.56, 2.3490, 1.256, 0.55, 5e-3, 5e-5, 5e-3}};
    const CountSeries s({3, 0, 5, 2, 2});
    for (const auto& c : cases) {
        const double mu_w = pl_moments(c.theta).mean;
        const PredictionTrace tr = predict(s, c.alpha, mu_w);
        CHECK_THAT(tr.predicted.front(), WithinRel(mu_w / (1.0 - c.alpha), 1e-14));
        CHECK_THAT(tr.innovation_mean, WithinRel(mu_w, 1e-15));
        const auto [slo, shi] = rounding_range(
            [](double a, double t) { return pl_moments(t).mean / (1.0 - a); }, c.alpha, c.theta, c.ulp_a, c.ulp_t);
        CHECK(slo - 5e-4 <= c.start);
        CHECK(c.start <= shi + 5e-4);
        const auto [ilo, ihi] = rounding_range([](double, double t) { return pl_moments(t).mean; },
                                               c.alpha, c.theta, c.ulp_a, c.ulp_t);
        CHECK(ilo - c.ulp_i <= c.intercept);
        CHECK(c.intercept <= ihi + c.ulp_i);
    }
}

TEST_CASE("observed-lag predictions have a constant intercept", "[analysis]") {
    const auto s = simulated(ThinningFamily::poisson(), 0.6942, 0.2878, 100, 3);
    const double mu_w = pl_moments(0.2878).mean;
    const PredictionTrace tr = predict(s, 0.6942, mu_w);
    REQUIRE(tr.predicted.size() == s.size());
    for (std::size_t i = 1; i < s.size(); ++i) {
        REQUIRE_THAT(tr.predicted[i] - 0.6942 * static_cast<double>(s[i - 1]), WithinAbs(mu_w, 1e-12));
        REQUIRE(tr.residuals[i] == static_cast<double>(s[i]) - tr.predicted[i]);
    }
    CHECK(tr.observed.front() == s[0]);

    const PredictionTrace flat = predict(s, 0.6942, mu_w, PredictionMode::PredictedLag);
    for (double p : flat.predicted) CHECK_THAT(p, WithinRel(mu_w / (1.0 - 0.6942), 1e-12));

    CHECK_THROWS_AS(predict(s, 1.0, mu_w), std::invalid_argument);
    CHECK_THROWS_AS(predict(s, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("model tags map to thinning and innovation", "[analysis]") {
    CHECK(family_of(ModelTag::NBINARPL).kind() == ThinningFamily::Kind::Geometric);
    CHECK(family_of(ModelTag::BINARPL).kind() == ThinningFamily::Kind::Bernoulli);
    CHECK(family_of(ModelTag::PINARPL).kind() == ThinningFamily::Kind::Poisson);
    CHECK(family_of(ModelTag::INARG).kind() == ThinningFamily::Kind::Bernoulli);
    CHECK(family_of(ModelTag::INARP).kind() == ThinningFamily::Kind::Bernoulli);
    CHECK(innovation_of(ModelTag::INARG) == InnovationKind::Geometric);
    CHECK(innovation_of(ModelTag::INARP) == InnovationKind::Poisson);
    CHECK(innovation_of(ModelTag::PINARPL) == InnovationKind::PoissonLindley);
    CHECK(to_string(ModelTag::NBINARPL) == "NBINARPL");
}

TEST_CASE("compare_models table structure", "[analysis]") {
    const auto s = simulated(ThinningFamily::geometric(), 0.5, 0.6, 200, 17);
    const ComparisonTable t = compare_models(s);
    REQUIRE(t.rows.size() == 5);
    CHECK(t.n_transitions == 199);
    const double a_cls = t.row(ModelTag::NBINARPL).cls->alpha_hat;
    for (const auto& r : t.rows) {
        INFO(to_string(r.model));
        CHECK(r.error.empty());
        REQUIRE(r.cls);
        REQUIRE(r.yw);
        REQUIRE(r.cmle);
        CHECK(r.cls->alpha_hat == a_cls);
        CHECK(r.yw->alpha_hat == t.row(ModelTag::NBINARPL).yw->alpha_hat);
        CHECK(r.aic == r.cmle->aic);
        CHECK(r.aic >= t.row(*t.best_by_aic).aic);
        CHECK(r.bic >= t.row(*t.best_by_bic).bic);
    }
    for (ModelTag tag : {ModelTag::NBINARPL, ModelTag::BINARPL, ModelTag::PINARPL}) {
        CHECK(t.row(tag).cls->param_hat == t.row(ModelTag::NBINARPL).cls->param_hat);
    }
    CHECK(t.best_by_aic == t.best_by_bic);

    const ComparisonTable again = compare_models(s);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(again.rows[i].aic == t.rows[i].aic);
        CHECK(again.rows[i].cmle->alpha_hat == t.rows[i].cmle->alpha_hat);
        CHECK(again.rows[i].cmle->param_hat == t.rows[i].cmle->param_hat);
    }
}

TEST_CASE("compare_models records per-row failures", "[analysis]") {
    std::vector<Count> xs;
    for (int i = 0; i < 60; ++i) xs.push_back(i % 2 == 0 ? 1 : 3);
    const ComparisonTable t = compare_models(CountSeries(xs));
    for (const auto& r : t.rows) {
        REQUIRE(r.cls);
        CHECK(r.cls->diagnostics.alpha_out_of_range);
        CHECK(r.cmle);
    }
    CHECK_THROWS_AS(compare_models(CountSeries({0, 0, 0, 0})), EstimationError);
}

TEST_CASE("compare_models selects the generating model", "[analysis][mc]") {
    constexpr int reps = 100;
    std::vector<int> wins(reps, 0);
    std::vector<std::jthread> pool;
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> next{0};
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int r = next++; r < reps; r = next++) {
                const auto s = simulated(ThinningFamily::poisson(), 0.7, 0.3, 2000,
                                         replicate_seed(77, 0, r));
                wins[r] = compare_models(s).best_by_aic == ModelTag::PINARPL;
            }
        });
    }
    pool.clear();
    int total = 0;
    for (int w : wins) total += w;
    CHECK(total > reps / 2);
}

TEST_CASE("replicate seeds are distinct and stable", "[analysis]") {
    CHECK(replicate_seed(1, 0, 0) == replicate_seed(1, 0, 0));
    CHECK(replicate_seed(1, 0, 0) != replicate_seed(1, 0, 1));
    CHECK(replicate_seed(1, 0, 0) != replicate_seed(1, 1, 0));
    CHECK(replicate_seed(1, 0, 0) != replicate_seed(2, 0, 0));
}

TEST_CASE("run_mc_study aggregation", "[analysis]") {
    McConfig cfg;
    cfg.family = ThinningFamily::bernoulli();
    cfg.alpha = 0.5;
    cfg.theta = 1.0;
    cfg.lengths = {150};
    cfg.replicates = 1;
    cfg.seed = 5;
    cfg.threads = 1;
    const McReport one = run_mc_study(cfg);
    REQUIRE(one.cells.size() == 6);

    Rng rng(replicate_seed(5, 0, 0));
    const CountSeries series(simulate(InarModel(ThinningFamily::bernoulli(), 0.5, PoissonLindley(1.0)), 150,
                                      cfg.burn_in, rng));
    const auto cls = fit_cls(series);
    const auto ml = fit_cmle(series, ThinningFamily::bernoulli(), InnovationKind::PoissonLindley);
    const McCell& c_alpha = one.cell(150, Method::Cls, "alpha");
    CHECK(c_alpha.replicates == 1);
    CHECK(c_alpha.ae == cls.alpha_hat);
    CHECK_THAT(c_alpha.rmse, WithinAbs(std::abs(c_alpha.abias), 1e-15));
    CHECK(c_alpha.mean_std_error);
    const McCell& m_theta = one.cell(150, Method::Cmle, "theta");
    CHECK(m_theta.ae == ml.param_hat);
    CHECK_THAT(m_theta.abias, WithinAbs(ml.param_hat - 1.0, 1e-15));
    CHECK_THAT(m_theta.rmse, WithinAbs(std::abs(m_theta.abias), 1e-15));
    CHECK_FALSE(m_theta.mean_std_error);
    CHECK_THROWS_AS(one.cell(300, Method::Cls, "alpha"), std::out_of_range);
}

TEST_CASE("run_mc_study does not depend on the thread count", "[analysis]") {
    McConfig cfg;
    cfg.family = ThinningFamily::geometric();
    cfg.alpha = 0.4;
    cfg.theta = 1.2;
    cfg.lengths = {60, 90};
    cfg.replicates = 24;
    cfg.seed = 11;
    cfg.threads = 1;
    const McReport serial = run_mc_study(cfg);
    cfg.threads = 4;
    const McReport parallel = run_mc_study(cfg);
    REQUIRE(serial.cells.size() == parallel.cells.size());
    for (std::size_t i = 0; i < serial.cells.size(); ++i) {
        CHECK(serial.cells[i].ae == parallel.cells[i].ae);
        CHECK(serial.cells[i].rmse == parallel.cells[i].rmse);
        CHECK(serial.cells[i].failures == parallel.cells[i].failures);
    }
    for (const auto& c : serial.cells) CHECK(c.replicates + c.failures == 24);

    cfg.replicates = 0;
    CHECK_THROWS_AS(run_mc_study(cfg), std::invalid_argument);
}
