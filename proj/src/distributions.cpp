#include "psinar/distributions.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace psinar {

namespace {

void require_count(Count x, const char* what) {
    if (x < 0) throw std::invalid_argument(std::string(what) + " must be non-negative");
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

}  // namespace

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1), got " + std::to_string(alpha));
    }
}

// ---------------------------------------------------------------------------
// PoissonLindley

PoissonLindley::PoissonLindley(double theta) : theta_(theta) { require_positive(theta, "theta"); }

double PoissonLindley::log_pmf(Count x) const {
    require_count(x, "x");
    const double xd = static_cast<double>(x);
    return 2.0 * std::log(theta_) + std::log(xd + theta_ + 2.0) - (xd + 3.0) * std::log1p(theta_);
}

double PoissonLindley::pmf(Count x) const { return std::exp(log_pmf(x)); }

double PoissonLindley::mean() const noexcept {
    return (theta_ + 2.0) / (theta_ * (theta_ + 1.0));
}

double PoissonLindley::variance() const noexcept {
    const double t = theta_;
    const double tp1 = t + 1.0;
    return (t * t * t + 4.0 * t * t + 6.0 * t + 2.0) / (t * t * tp1 * tp1);
}

double PoissonLindley::pgf(double t) const {
    const double d = 1.0 + theta_ - t;
    if (!(d > 0.0)) throw std::domain_error("pgf argument must be below 1 + theta");
    return theta_ * theta_ / (1.0 + theta_) * (1.0 / (d * d) + 1.0 / d);
}

double PoissonLindley::mgf(double t) const { return pgf(std::exp(t)); }

Count PoissonLindley::sample(Rng& rng) const {
    std::bernoulli_distribution exponential_branch(theta_ / (theta_ + 1.0));
    const double shape = exponential_branch(rng) ? 1.0 : 2.0;
    const double rate = std::gamma_distribution<double>(shape, 1.0 / theta_)(rng);
    if (!(rate > 0.0)) return 0;
    return std::poisson_distribution<Count>(rate)(rng);
}

double pl_pmf(Count x, double theta) { return PoissonLindley(theta).pmf(x); }
double pl_log_pmf(Count x, double theta) { return PoissonLindley(theta).log_pmf(x); }

Moments pl_moments(double theta) {
    const PoissonLindley pl(theta);
    return {pl.mean(), pl.variance()};
}

double pl_pgf(double t, double theta) { return PoissonLindley(theta).pgf(t); }
double pl_mgf(double t, double theta) { return PoissonLindley(theta).mgf(t); }
Count pl_sample(double theta, Rng& rng) { return PoissonLindley(theta).sample(rng); }

double pl_theta_from_mean(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw std::domain_error("Poisson-Lindley mean must be positive");
    }
    // Positive root of c*theta^2 + (c - 1)*theta - 2 = 0, written to avoid
    // cancellation when c > 1.
    const double b = c - 1.0;
    const double root = std::sqrt(b * b + 8.0 * c);
    if (b >= 0.0) return 4.0 / (b + root);
    return (-b + root) / (2.0 * c);
}

// ---------------------------------------------------------------------------
// Baseline innovations

PoissonInnovation::PoissonInnovation(double lambda) : lambda_(lambda) {
    require_positive(lambda, "lambda");
}

double PoissonInnovation::log_pmf(Count x) const {
    require_count(x, "x");
    return -lambda_ + static_cast<double>(x) * std::log(lambda_) - log_factorial(x);
}

double PoissonInnovation::pmf(Count x) const { return std::exp(log_pmf(x)); }

Count PoissonInnovation::sample(Rng& rng) const {
    return std::poisson_distribution<Count>(lambda_)(rng);
}

GeometricInnovation::GeometricInnovation(double p) : p_(p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric p must lie in (0, 1)");
}

double GeometricInnovation::log_pmf(Count x) const {
    require_count(x, "x");
    return std::log(p_) + static_cast<double>(x) * std::log1p(-p_);
}

double GeometricInnovation::pmf(Count x) const { return std::exp(log_pmf(x)); }

Count GeometricInnovation::sample(Rng& rng) const {
    return std::geometric_distribution<Count>(p_)(rng);
}

std::string_view to_string(InnovationKind kind) noexcept {
    switch (kind) {
        case InnovationKind::PoissonLindley: return "poisson-lindley";
        case InnovationKind::Poisson: return "poisson";
        case InnovationKind::Geometric: return "geometric";
    }
    return "unknown";
}

std::optional<InnovationKind> parse_innovation_kind(std::string_view name) noexcept {
    if (name == "pl" || name == "poisson-lindley") return InnovationKind::PoissonLindley;
    if (name == "poisson") return InnovationKind::Poisson;
    if (name == "geometric") return InnovationKind::Geometric;
    return std::nullopt;
}

std::string_view parameter_name(InnovationKind kind) noexcept {
    switch (kind) {
        case InnovationKind::PoissonLindley: return "theta";
        case InnovationKind::Poisson: return "lambda";
        case InnovationKind::Geometric: return "p";
    }
    return "param";
}

InnovationKind kind_of(const InnovationSpec& spec) noexcept {
    return static_cast<InnovationKind>(spec.index());
}

double parameter_of(const InnovationSpec& spec) noexcept {
    struct Visitor {
        double operator()(const PoissonLindley& d) const { return d.theta(); }
        double operator()(const PoissonInnovation& d) const { return d.lambda(); }
        double operator()(const GeometricInnovation& d) const { return d.p(); }
    };
    return std::visit(Visitor{}, spec);
}

InnovationSpec make_innovation(InnovationKind kind, double parameter) {
    switch (kind) {
        case InnovationKind::PoissonLindley: return PoissonLindley(parameter);
        case InnovationKind::Poisson: return PoissonInnovation(parameter);
        case InnovationKind::Geometric: return GeometricInnovation(parameter);
    }
    throw std::invalid_argument("unknown innovation kind");
}

InnovationSpec innovation_with_mean(InnovationKind kind, double mean) {
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw std::domain_error("innovation mean must be positive");
    }
    switch (kind) {
        case InnovationKind::PoissonLindley: return PoissonLindley(pl_theta_from_mean(mean));
        case InnovationKind::Poisson: return PoissonInnovation(mean);
        case InnovationKind::Geometric: return GeometricInnovation(1.0 / (1.0 + mean));
    }
    throw std::invalid_argument("unknown innovation kind");
}

double innovation_pmf(const InnovationSpec& spec, Count x) {
    return std::visit([x](const auto& d) { return d.pmf(x); }, spec);
}

double innovation_log_pmf(const InnovationSpec& spec, Count x) {
    return std::visit([x](const auto& d) { return d.log_pmf(x); }, spec);
}

Moments innovation_moments(const InnovationSpec& spec) {
    return std::visit([](const auto& d) { return Moments{d.mean(), d.variance()}; }, spec);
}

Count innovation_sample(const InnovationSpec& spec, Rng& rng) {
    return std::visit([&rng](const auto& d) { return d.sample(rng); }, spec);
}

// ---------------------------------------------------------------------------
// Counting laws

namespace {

constexpr Count kSeriesTermCap = 200000;

// sum_y y^power a(y) beta^y / C(beta), summed until the terms are negligible.
double power_series_moment(const PowerSeriesLaw& law, double beta, int power) {
    const double c = law.series(beta);
    const Count last = law.max_support.value_or(kSeriesTermCap);
    double total = 0.0;
    double prev = 0.0;
    for (Count y = 0; y <= last; ++y) {
        const double a = law.coefficient(y);
        const double base = a > 0.0 ? a * std::pow(beta, static_cast<double>(y)) / c : 0.0;
        const double term = base * std::pow(static_cast<double>(y), power);
        total += term;
        if (y > 8 && base < prev && term <= 1e-18 * std::max(total, 1e-300)) break;
        prev = base;
    }
    return total;
}

double solve_beta(const PowerSeriesLaw& law, double alpha) {
    auto mean_at = [&law](double beta) { return power_series_moment(law, beta, 1); };
    double lo = 0.0;
    double hi;
    if (std::isfinite(law.beta_limit)) {
        // Approach the radius of convergence geometrically; the truncated
        // series is unreliable right at the limit.
        double gap = 0.5;
        hi = law.beta_limit * (1.0 - gap);
        while (!(mean_at(hi) > alpha)) {
            gap *= 0.5;
            if (gap < 1e-6) throw std::domain_error("power-series law cannot reach the requested mean");
            hi = law.beta_limit * (1.0 - gap);
        }
    } else {
        hi = 1.0;
        while (mean_at(hi) <= alpha) {
            hi *= 2.0;
            if (hi > 1e12) throw std::domain_error("power-series law cannot reach the requested mean");
        }
    }
    // Bisect to machine resolution; well inside the 1e-12 bracket tolerance.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (mean_at(mid) < alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ThinningFamily ThinningFamily::power_series(PowerSeriesLaw law) {
    if (!law.coefficient || !law.series) {
        throw std::invalid_argument("power-series law needs a(y) and C(beta)");
    }
    ThinningFamily family(Kind::PowerSeries);
    family.law_ = std::make_shared<const PowerSeriesLaw>(std::move(law));
    return family;
}

std::string_view ThinningFamily::name() const noexcept {
    switch (kind_) {
        case Kind::Bernoulli: return "bernoulli";
        case Kind::Geometric: return "geometric";
        case Kind::Poisson: return "poisson";
        case Kind::PowerSeries: return "power-series";
    }
    return "unknown";
}

double ThinningFamily::log_pmf(double alpha, Count y) const {
    require_alpha(alpha);
    require_count(y, "y");
    const double yd = static_cast<double>(y);
    switch (kind_) {
        case Kind::Bernoulli:
            if (y == 0) return std::log1p(-alpha);
            if (y == 1) return std::log(alpha);
            return kNegInf;
        case Kind::Geometric:
            return yd * std::log(alpha) - (yd + 1.0) * std::log1p(alpha);
        case Kind::Poisson:
            return -alpha + yd * std::log(alpha) - log_factorial(y);
        case Kind::PowerSeries: {
            if (law_->max_support && y > *law_->max_support) return kNegInf;
            const double a = law_->coefficient(y);
            if (!(a > 0.0)) return kNegInf;
            const double b = beta(alpha);
            return std::log(a) + yd * std::log(b) - std::log(law_->series(b));
        }
    }
    return kNegInf;
}

double ThinningFamily::pmf(double alpha, Count y) const { return std::exp(log_pmf(alpha, y)); }

double ThinningFamily::delta(double alpha) const {
    require_alpha(alpha);
    switch (kind_) {
        case Kind::Bernoulli: return alpha * (1.0 - alpha);
        case Kind::Geometric: return alpha * (1.0 + alpha);
        case Kind::Poisson: return alpha;
        case Kind::PowerSeries: {
            const double b = beta(alpha);
            const double m1 = power_series_moment(*law_, b, 1);
            return power_series_moment(*law_, b, 2) - m1 * m1;
        }
    }
    return 0.0;
}

double ThinningFamily::beta(double alpha) const {
    require_alpha(alpha);
    switch (kind_) {
        case Kind::Bernoulli: return alpha / (1.0 - alpha);
        case Kind::Geometric: return alpha / (1.0 + alpha);
        case Kind::Poisson: return alpha;
        case Kind::PowerSeries: return solve_beta(*law_, alpha);
    }
    return 0.0;
}

std::optional<Count> ThinningFamily::max_support() const noexcept {
    switch (kind_) {
        case Kind::Bernoulli: return Count{1};
        case Kind::PowerSeries: return law_->max_support;
        default: return std::nullopt;
    }
}

Count ThinningFamily::sample(double alpha, Rng& rng) const {
    require_alpha(alpha);
    switch (kind_) {
        case Kind::Bernoulli: return std::bernoulli_distribution(alpha)(rng) ? 1 : 0;
        case Kind::Geometric: return std::geometric_distribution<Count>(1.0 / (1.0 + alpha))(rng);
        case Kind::Poisson: return std::poisson_distribution<Count>(alpha)(rng);
        case Kind::PowerSeries: {
            const double b = beta(alpha);
            const double c = law_->series(b);
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            const Count last = law_->max_support.value_or(kSeriesTermCap);
            double cdf = 0.0;
            for (Count y = 0; y <= last; ++y) {
                cdf += law_->coefficient(y) * std::pow(b, static_cast<double>(y)) / c;
                if (u < cdf) return y;
            }
            return last;
        }
    }
    return 0;
}

std::optional<ThinningFamily> parse_family(std::string_view name) {
    if (name == "bernoulli" || name == "binomial") return ThinningFamily::bernoulli();
    if (name == "geometric" || name == "negative-binomial") return ThinningFamily::geometric();
    if (name == "poisson") return ThinningFamily::poisson();
    return std::nullopt;
}

double counting_pmf(const ThinningFamily& family, double alpha, Count y) {
    return family.pmf(alpha, y);
}

double counting_log_pmf(const ThinningFamily& family, double alpha, Count y) {
    return family.log_pmf(alpha, y);
}

}  // namespace psinar
