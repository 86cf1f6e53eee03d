#pragma once

#include "psinar/distributions.hpp"
#include "psinar/optimize.hpp"
#include "psinar/process.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace psinar {

enum class Method { Cls, YuleWalker, Cmle };

[[nodiscard]] std::string_view to_string(Method method) noexcept;
[[nodiscard]] std::optional<Method> parse_method(std::string_view name) noexcept;

/// Raised when the predecessor values (CLS) or the whole series (YW) are constant.
class DegenerateSeriesError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// (alpha, mu) from CLS or Yule-Walker, where mu = E(X_t).
struct MomentEstimate {
    double alpha_hat;
    double mu_hat;
    /// False when alpha_hat is outside (0, 1); mu_hat and theta are then not meaningful.
    bool alpha_in_range;
};

/**
 * Conditional least squares: minimizes
 * S(alpha, mu) = sum_{t>=2} (x_t - alpha x_{t-1} - (1 - alpha) mu)^2.
 *
 * @throws std::invalid_argument if the series has fewer than three values.
 * @throws DegenerateSeriesError if x_1..x_{T-1} is constant.
 */
MomentEstimate fit_cls(const CountSeries& series);

/// mu = sample mean, alpha = lag-1 sample autocorrelation.
MomentEstimate fit_yw(const CountSeries& series);

/**
 * Solves mu = (theta + 2) / (theta (theta + 1) (1 - alpha)) for theta.
 * @throws std::invalid_argument unless 0 < alpha_hat < 1.
 * @throws std::domain_error if (1 - alpha_hat) mu_hat <= 0.
 */
double invert_theta(double mu_hat, double alpha_hat);

struct FitDiagnostics {
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    std::size_t starts_tried = 0;
    std::size_t starts_converged = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    bool alpha_out_of_range = false;  // CLS / YW alpha outside (0, 1)
    bool alpha_near_zero = false;     // alpha_hat < 1e-3
    bool alpha_near_one = false;      // alpha_hat > 0.999
};

struct FitResult {
    Method method = Method::Cls;
    ThinningFamily family = ThinningFamily::bernoulli();
    InnovationKind innovation = InnovationKind::PoissonLindley;
    double alpha_hat = 0.0;
    double param_hat = 0.0;        // theta, lambda or p; NaN when unavailable
    std::optional<double> mu_hat;  // CLS / YW only
    double loglik = 0.0;           // NaN when the estimates are out of range
    double aic = 0.0;
    double bic = 0.0;
    std::optional<std::pair<double, double>> std_errors;
    FitDiagnostics diagnostics;

    /// Estimates are inside the parameter space and a likelihood is available.
    [[nodiscard]] bool usable() const noexcept;
    /// @throws std::logic_error unless usable().
    [[nodiscard]] InarModel model() const;
};

/// Number of free parameters in every model here: alpha and one innovation parameter.
inline constexpr int kModelParameters = 2;

/**
 * CLS or Yule-Walker fit with the innovation parameter recovered from the
 * innovation mean (1 - alpha) mu. The likelihood, AIC and BIC are
 * evaluated at the plug-in point. An alpha outside (0, 1) is reported
 * through diagnostics.alpha_out_of_range rather than clamped.
 */
FitResult fit_moment(const CountSeries& series, Method method, const ThinningFamily& family,
                     InnovationKind innovation);

struct CmleOptions {
    SimplexOptions simplex{};
    /// How many of the best 5x5 grid points are refined besides the CLS and YW starts.
    std::size_t grid_refinements = 2;
    /// Extra (alpha, parameter) start.
    std::optional<std::pair<double, double>> init;
};

class EstimationError : public std::runtime_error {
public:
    EstimationError(const std::string& what, FitDiagnostics diagnostics)
        : std::runtime_error(what), diagnostics_(diagnostics) {}
    [[nodiscard]] const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }

private:
    FitDiagnostics diagnostics_;
};

/**
 * @brief Conditional maximum likelihood.
 *
 * Maximizes log_likelihood over (alpha, innovation parameter) with
 * Nelder-Mead in (logit alpha, log theta | log lambda | logit p), restricted
 * to a box of +-30 in each coordinate. Starts from the CLS and YW estimates
 * (when in range), the optional user start, and the best grid_refinements
 * points of a 5x5 grid of alpha and innovation mean. The best optimum wins;
 * ties go to the smaller alpha.
 *
 * @throws EstimationError when no start converges.
 */
FitResult fit_cmle(const CountSeries& series, const ThinningFamily& family,
                   InnovationKind innovation, const CmleOptions& options = {});

/// Large-sample covariance of the CLS (alpha, theta) estimator.
struct ClsAsymptotics {
    double c;
    double r11, r12, r21, r22;
    std::array<std::array<double, 2>, 2> covariance;  // c^2 A / (T - 1)
    std::pair<double, double> std_errors;
};

/**
 * Evaluates the CLS asymptotic covariance with sample raw moments mu_1..mu_3,
 * delta = delta(alpha_hat) and sigma_W^2 = Var PL(theta_hat).
 *
 * @throws std::invalid_argument for out-of-range estimates or T < 3.
 * @throws DegenerateSeriesError if the sample variance is zero.
 */
ClsAsymptotics cls_asymptotics(const CountSeries& series, double alpha_hat, double theta_hat,
                               const ThinningFamily& family);

}  // namespace psinar
