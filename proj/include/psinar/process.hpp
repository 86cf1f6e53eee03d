#pragma once

#include "psinar/distributions.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace psinar {

/// Observed counts x_1..x_T with T >= 2 and every entry >= 0.
class CountSeries {
public:
    /// @throws std::invalid_argument on a negative entry or fewer than two values.
    explicit CountSeries(std::vector<Count> values);

    [[nodiscard]] std::span<const Count> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] Count operator[](std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] Count max() const noexcept;

    [[nodiscard]] auto begin() const noexcept { return values_.begin(); }
    [[nodiscard]] auto end() const noexcept { return values_.end(); }

private:
    std::vector<Count> values_;
};

/**
 * @brief X_t = alpha o X_{t-1} + W_t with power-series thinning.
 *
 * With Poisson-Lindley innovations this is PSINARPL(1); the Bernoulli,
 * Geometric and Poisson thinning families give BINARPL(1), NBINARPL(1) and
 * PINARPL(1). Bernoulli thinning with Poisson or geometric innovations gives
 * the INARP(1) and INARG(1) baselines.
 */
class InarModel {
public:
    /// @throws std::invalid_argument unless 0 < alpha < 1.
    InarModel(ThinningFamily family, double alpha, InnovationSpec innovation);

    [[nodiscard]] const ThinningFamily& family() const noexcept { return family_; }
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] const InnovationSpec& innovation() const noexcept { return innovation_; }
    /// Var(Y) of the counting law at this alpha.
    [[nodiscard]] double delta() const noexcept { return delta_; }

private:
    ThinningFamily family_;
    double alpha_;
    InnovationSpec innovation_;
    double delta_;
};

inline constexpr std::size_t kDefaultBurnIn = 500;

/// Stationary mean mu_W / (1 - alpha) and variance
/// (delta mu_W / (1 - alpha) + sigma_W^2) / (1 - alpha^2).
Moments model_moments(const InarModel& model);

/// rho_k = alpha^k.
double autocorrelation(const InarModel& model, Count k);

/// (alpha x + mu_W, delta x + sigma_W^2).
Moments conditional_moments(const InarModel& model, Count x);

/**
 * Simulates `length` values after discarding `burn_in` steps.
 * The chain starts from X_0 = 0.
 */
std::vector<Count> simulate(const InarModel& model, std::size_t length, std::size_t burn_in,
                            Rng& rng);

/**
 * @brief Log transition probabilities log P(X_t = k | X_{t-1} = l).
 *
 * Precomputes the innovation log-pmf on 0..max_state and the per-alpha
 * constants so repeated evaluations inside a likelihood stay cheap. States
 * above max_state are still handled, just without the table.
 */
class TransitionKernel {
public:
    TransitionKernel(const InarModel& model, Count max_state);

    [[nodiscard]] double log_prob(Count l, Count k) const;
    [[nodiscard]] Count max_state() const noexcept { return max_state_; }

private:
    [[nodiscard]] double log_innovation(Count w) const;
    [[nodiscard]] double log_thinned(Count l, Count m) const;

    const InarModel* model_;
    Count max_state_;
    std::vector<double> log_innovation_;
    // Per-state thinned log-pmf, only filled for custom power-series families.
    std::vector<std::vector<double>> custom_thinned_;
    double log_alpha_;
    double log1m_alpha_;
    double log1p_alpha_;
};

double transition_prob(const InarModel& model, Count l, Count k);
double log_transition_prob(const InarModel& model, Count l, Count k);

struct TransitionRow {
    std::vector<double> probs;  // k = 0..cap
    double tail;                // 1 - sum(probs), clamped at 0
};

TransitionRow transition_row(const InarModel& model, Count l, Count cap);

/// Support cap for a state: max_value + 10 conditional std devs, at least 50.
Count default_cap(const InarModel& model, Count max_value);

/// sum_{t>=2} log P(x_t | x_{t-1}), conditional on x_1.
double log_likelihood(const InarModel& model, std::span<const Count> series);
double log_likelihood(const InarModel& model, const CountSeries& series);

/// Raised when power iteration does not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, std::size_t iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/**
 * Fixed point of the transition kernel truncated to {0..cap} with each row
 * renormalized, found by power iteration until successive iterates differ
 * by less than `tol` in total variation.
 *
 * @throws std::invalid_argument if cap < mean + 10 standard deviations.
 * @throws ConvergenceError after max_iterations.
 */
std::vector<double> stationary_distribution(const InarModel& model, Count cap, double tol,
                                            std::size_t max_iterations = 100000);

/// log initial_dist[x_1] + log_likelihood. Accepts a single observation.
/// @throws std::invalid_argument if x_1 is outside initial_dist.
double joint_log_pmf(const InarModel& model, std::span<const Count> series,
                     std::span<const double> initial_dist);

}  // namespace psinar
