#pragma once

#include "psinar/estimation.hpp"
#include "psinar/information_criteria.hpp"
#include "psinar/process.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace psinar {

// ---------------------------------------------------------------------------
// Forecasting

enum class PredictionMode {
    ObservedLag,   // x_hat_i = alpha x_{i-1} + mu_W
    PredictedLag,  // x_hat_i = alpha x_hat_{i-1} + mu_W
};

struct PredictionTrace {
    double alpha_hat;
    double innovation_mean;  // the recursion intercept mu_W
    PredictionMode mode;
    std::vector<Count> observed;
    std::vector<double> predicted;  // x_hat_1 = mu_W / (1 - alpha)
    std::vector<double> residuals;  // observed - predicted
};

/**
 * One-step-ahead conditional-mean predictions. The first prediction is the
 * unconditional mean. PredictedLag feeds predictions back in; starting from
 * the unconditional mean it stays there, so ObservedLag is the default.
 *
 * @throws std::invalid_argument unless 0 < alpha_hat < 1 and innovation_mean > 0.
 */
PredictionTrace predict(const CountSeries& series, double alpha_hat, double innovation_mean,
                        PredictionMode mode = PredictionMode::ObservedLag);

// ---------------------------------------------------------------------------
// Model comparison

enum class ModelTag { NBINARPL, BINARPL, PINARPL, INARG, INARP };

inline constexpr std::array<ModelTag, 5> kAllModels = {
    ModelTag::NBINARPL, ModelTag::BINARPL, ModelTag::PINARPL, ModelTag::INARG, ModelTag::INARP};

[[nodiscard]] std::string_view to_string(ModelTag tag) noexcept;
[[nodiscard]] ThinningFamily family_of(ModelTag tag);
[[nodiscard]] InnovationKind innovation_of(ModelTag tag) noexcept;

struct ComparisonRow {
    ModelTag model;
    std::optional<FitResult> cls;
    std::optional<FitResult> yw;
    std::optional<FitResult> cmle;
    std::string error;  // first failure encountered, empty if none
    /// From the CMLE log-likelihood; NaN when the CMLE fit failed.
    double aic;
    double bic;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::optional<ModelTag> best_by_aic;
    std::optional<ModelTag> best_by_bic;
    std::size_t n_transitions;  // sample size used by BIC

    [[nodiscard]] const ComparisonRow& row(ModelTag tag) const;
};

/**
 * Fits the five candidate models by CLS, YW and CMLE and ranks them by the
 * CMLE AIC and BIC. Failed fits are recorded in their row.
 *
 * @throws EstimationError if no model could be fitted by CMLE.
 */
ComparisonTable compare_models(const CountSeries& series, const CmleOptions& options = {});

// ---------------------------------------------------------------------------
// Monte Carlo study

struct McConfig {
    ThinningFamily family = ThinningFamily::bernoulli();
    double alpha = 0.5;
    double theta = 1.0;
    std::vector<std::size_t> lengths{100, 200, 300};
    std::size_t replicates = 1000;
    std::uint64_t seed = 20240607;
    std::size_t burn_in = kDefaultBurnIn;
    /// Worker threads; 0 uses std::thread::hardware_concurrency().
    unsigned threads = 0;
    std::vector<Method> methods{Method::Cls, Method::YuleWalker, Method::Cmle};
    CmleOptions cmle{};
};

/// Aggregate of one (T, method, parameter) cell.
struct McCell {
    std::size_t length;
    Method method;
    std::string parameter;  // "alpha" or "theta"
    double truth;
    double ae;     // average estimate
    double abias;  // ae - truth
    double rmse;
    double sd;  // cross-replicate standard deviation of the estimates
    std::size_t replicates;  // replicates that entered the aggregate
    std::size_t failures;    // replicates excluded
    /// Mean reported standard error (CLS only, from the asymptotic covariance).
    std::optional<double> mean_std_error;
};

struct McReport {
    McConfig config;
    std::vector<McCell> cells;

    /// @throws std::out_of_range if the cell was not computed.
    [[nodiscard]] const McCell& cell(std::size_t length, Method method,
                                     std::string_view parameter) const;
};

/// Per-replicate RNG seed, a function of (master seed, length index,
/// replicate index) only, so results do not depend on the thread count.
[[nodiscard]] std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t stream,
                                           std::uint64_t index);

/**
 * Simulates `replicates` series for every length and fits each by the
 * configured methods with Poisson-Lindley innovations. CLS/YW replicates
 * with alpha outside (0, 1) and CMLE fits that fail are counted as failures
 * and excluded from the aggregates.
 */
McReport run_mc_study(const McConfig& config);

}  // namespace psinar
