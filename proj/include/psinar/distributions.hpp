#pragma once

#include "psinar/numeric.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string_view>
#include <variant>

namespace psinar {

/// Random source. Every sampling routine takes one by reference; none is shared.
using Rng = std::mt19937_64;

struct Moments {
    double mean;
    double variance;
};

// ---------------------------------------------------------------------------
// Poisson-Lindley innovation law
// ---------------------------------------------------------------------------

/**
 * @brief Poisson-Lindley distribution with shape theta > 0.
 *
 * P(X = x) = theta^2 (x + theta + 2) / (theta + 1)^(x + 3), x = 0, 1, ...
 *
 * It is a Poisson mixture over a Lindley rate, which is also how it is
 * sampled: with probability theta/(theta+1) the rate is Exponential(theta),
 * otherwise Gamma(2, theta).
 */
class PoissonLindley {
public:
    /// @throws std::invalid_argument unless theta > 0 and finite.
    explicit PoissonLindley(double theta);

    [[nodiscard]] double theta() const noexcept { return theta_; }

    [[nodiscard]] double pmf(Count x) const;
    [[nodiscard]] double log_pmf(Count x) const;
    [[nodiscard]] double mean() const noexcept;
    [[nodiscard]] double variance() const noexcept;

    /// Probability generating function; requires t < 1 + theta.
    [[nodiscard]] double pgf(double t) const;
    /// Moment generating function; requires exp(t) < 1 + theta.
    [[nodiscard]] double mgf(double t) const;

    Count sample(Rng& rng) const;

private:
    double theta_;
};

double pl_pmf(Count x, double theta);
double pl_log_pmf(Count x, double theta);
Moments pl_moments(double theta);
double pl_pgf(double t, double theta);
double pl_mgf(double t, double theta);
Count pl_sample(double theta, Rng& rng);

/// Inverse of the PL mean map: the unique theta > 0 with mean(theta) = c.
/// @throws std::domain_error if c <= 0.
double pl_theta_from_mean(double c);

// ---------------------------------------------------------------------------
// Baseline innovation laws
// ---------------------------------------------------------------------------

/// Poisson(lambda) innovations.
class PoissonInnovation {
public:
    explicit PoissonInnovation(double lambda);
    [[nodiscard]] double lambda() const noexcept { return lambda_; }
    [[nodiscard]] double pmf(Count x) const;
    [[nodiscard]] double log_pmf(Count x) const;
    [[nodiscard]] double mean() const noexcept { return lambda_; }
    [[nodiscard]] double variance() const noexcept { return lambda_; }
    Count sample(Rng& rng) const;

private:
    double lambda_;
};

/// Geometric(p) innovations on {0, 1, ...}: P(X = x) = p (1 - p)^x.
class GeometricInnovation {
public:
    explicit GeometricInnovation(double p);
    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] double pmf(Count x) const;
    [[nodiscard]] double log_pmf(Count x) const;
    [[nodiscard]] double mean() const noexcept { return (1.0 - p_) / p_; }
    [[nodiscard]] double variance() const noexcept { return (1.0 - p_) / (p_ * p_); }
    Count sample(Rng& rng) const;

private:
    double p_;
};

using InnovationSpec = std::variant<PoissonLindley, PoissonInnovation, GeometricInnovation>;

enum class InnovationKind { PoissonLindley, Poisson, Geometric };

[[nodiscard]] std::string_view to_string(InnovationKind kind) noexcept;
/// Accepts "pl", "poisson-lindley", "poisson", "geometric" (case-sensitive).
[[nodiscard]] std::optional<InnovationKind> parse_innovation_kind(std::string_view name) noexcept;
/// Name of the scalar parameter: "theta", "lambda" or "p".
[[nodiscard]] std::string_view parameter_name(InnovationKind kind) noexcept;

[[nodiscard]] InnovationKind kind_of(const InnovationSpec& spec) noexcept;
[[nodiscard]] double parameter_of(const InnovationSpec& spec) noexcept;
[[nodiscard]] InnovationSpec make_innovation(InnovationKind kind, double parameter);
/// Moment inversion: the innovation of the given kind whose mean is `mean`.
[[nodiscard]] InnovationSpec innovation_with_mean(InnovationKind kind, double mean);

[[nodiscard]] double innovation_pmf(const InnovationSpec& spec, Count x);
[[nodiscard]] double innovation_log_pmf(const InnovationSpec& spec, Count x);
[[nodiscard]] Moments innovation_moments(const InnovationSpec& spec);
Count innovation_sample(const InnovationSpec& spec, Rng& rng);

// ---------------------------------------------------------------------------
// Counting laws for the thinning operator
// ---------------------------------------------------------------------------

/**
 * @brief User-supplied power-series law a(y) beta^y / C(beta).
 *
 * The law is reparameterized by its mean: for a thinning coefficient alpha
 * the beta in (0, beta_limit) solving beta G'(beta) = alpha is found by
 * bracketed bisection.
 */
struct PowerSeriesLaw {
    std::function<double(Count)> coefficient;  // a(y) >= 0
    std::function<double(double)> series;      // C(beta) = sum a(y) beta^y
    double beta_limit = std::numeric_limits<double>::infinity();
    std::optional<Count> max_support;  // set when the range is {0..n}
};

/**
 * @brief Law of the counting variables Y_i summed by the thinning operator.
 *
 * Bernoulli, Geometric and Poisson are parameterized directly by their mean
 * alpha. Geometric uses P(Y = y) = alpha^y / (1 + alpha)^(y + 1).
 */
class ThinningFamily {
public:
    enum class Kind { Bernoulli, Geometric, Poisson, PowerSeries };

    static ThinningFamily bernoulli() { return ThinningFamily(Kind::Bernoulli); }
    static ThinningFamily geometric() { return ThinningFamily(Kind::Geometric); }
    static ThinningFamily poisson() { return ThinningFamily(Kind::Poisson); }
    static ThinningFamily power_series(PowerSeriesLaw law);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] std::string_view name() const noexcept;

    /// P(Y = y) with E[Y] = alpha. Zero outside the range.
    [[nodiscard]] double pmf(double alpha, Count y) const;
    [[nodiscard]] double log_pmf(double alpha, Count y) const;
    /// delta(alpha) = Var(Y).
    [[nodiscard]] double delta(double alpha) const;
    /// The power-series parameter beta matching mean alpha.
    [[nodiscard]] double beta(double alpha) const;
    /// Largest value in the range; nullopt when unbounded.
    [[nodiscard]] std::optional<Count> max_support() const noexcept;

    /// One counting variate Y.
    Count sample(double alpha, Rng& rng) const;

    [[nodiscard]] const PowerSeriesLaw* law() const noexcept { return law_.get(); }

private:
    explicit ThinningFamily(Kind kind) : kind_(kind) {}

    Kind kind_;
    std::shared_ptr<const PowerSeriesLaw> law_;
};

/// Accepts "bernoulli"/"binomial", "geometric"/"negative-binomial", "poisson".
[[nodiscard]] std::optional<ThinningFamily> parse_family(std::string_view name);

double counting_pmf(const ThinningFamily& family, double alpha, Count y);
double counting_log_pmf(const ThinningFamily& family, double alpha, Count y);

/// @throws std::invalid_argument unless 0 < alpha < 1.
void require_alpha(double alpha);

}  // namespace psinar
