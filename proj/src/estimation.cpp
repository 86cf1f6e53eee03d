#include "psinar/estimation.hpp"

#include "psinar/information_criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace psinar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBox = 30.0;

void require_estimable(const CountSeries& series) {
    if (series.size() < 3) throw std::invalid_argument("estimation needs at least three values");
}

double sample_mean(const CountSeries& series) {
    double total = 0.0;
    for (Count v : series) total += static_cast<double>(v);
    return total / static_cast<double>(series.size());
}

bool valid_parameter(InnovationKind kind, double param) {
    if (!std::isfinite(param) || !(param > 0.0)) return false;
    return kind != InnovationKind::Geometric || param < 1.0;
}

double to_unconstrained(InnovationKind kind, double param) {
    return kind == InnovationKind::Geometric ? logit(param) : std::log(param);
}

double from_unconstrained(InnovationKind kind, double u) {
    return kind == InnovationKind::Geometric ? expit(u) : std::exp(u);
}

double parameter_with_mean(InnovationKind kind, double mean) {
    return parameter_of(innovation_with_mean(kind, mean));
}

// Log-likelihood at natural parameters; NaN if they are outside the space.
double loglik_at(const CountSeries& series, const ThinningFamily& family, InnovationKind kind,
                 double alpha, double param) {
    if (!(alpha > 0.0 && alpha < 1.0) || !valid_parameter(kind, param)) return kNaN;
    const InarModel model(family, alpha, make_innovation(kind, param));
    return log_likelihood(model, series);
}

void set_alpha_flags(FitDiagnostics& d, double alpha) {
    d.alpha_near_zero = alpha < 1e-3;
    d.alpha_near_one = alpha > 0.999;
}

void fill_criteria(FitResult& r, std::size_t n_obs) {
    if (!std::isfinite(r.loglik)) {
        r.aic = r.bic = kNaN;
        return;
    }
    const auto ic = information_criteria(r.loglik, kModelParameters, static_cast<double>(n_obs - 1));
    r.aic = ic.aic;
    r.bic = ic.bic;
}

// Standard errors from the observed information in (alpha, param).
std::optional<std::pair<double, double>> observed_information_errors(
    const CountSeries& series, const ThinningFamily& family, InnovationKind kind, double alpha,
    double param) {
    const std::array<double, 2> x{alpha, param};
    std::array<double, 2> h{};
    for (int i = 0; i < 2; ++i) h[i] = 1e-4 * std::max(std::abs(x[i]), 1e-2);
    h[0] = std::min({h[0], 0.5 * alpha, 0.5 * (1.0 - alpha)});
    if (kind == InnovationKind::Geometric) h[1] = std::min({h[1], 0.5 * param, 0.5 * (1.0 - param)});
    else h[1] = std::min(h[1], 0.5 * param);

    auto f = [&](double da, double dp) {
        return loglik_at(series, family, kind, alpha + da, param + dp);
    };
    const double f0 = f(0, 0);
    const double faa = (f(h[0], 0) - 2 * f0 + f(-h[0], 0)) / (h[0] * h[0]);
    const double fpp = (f(0, h[1]) - 2 * f0 + f(0, -h[1])) / (h[1] * h[1]);
    const double fap =
        (f(h[0], h[1]) - f(h[0], -h[1]) - f(-h[0], h[1]) + f(-h[0], -h[1])) / (4 * h[0] * h[1]);
    // Information = -Hessian.
    const double i_aa = -faa, i_pp = -fpp, i_ap = -fap;
    const double det = i_aa * i_pp - i_ap * i_ap;
    if (!std::isfinite(det) || !(det > 0.0) || !(i_aa > 0.0)) return std::nullopt;
    return std::pair{std::sqrt(i_pp / det), std::sqrt(i_aa / det)};
}

}  // namespace

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::Cls: return "CLS";
        case Method::YuleWalker: return "YW";
        case Method::Cmle: return "CMLE";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
    if (name == "cls" || name == "CLS") return Method::Cls;
    if (name == "yw" || name == "YW") return Method::YuleWalker;
    if (name == "cmle" || name == "CMLE" || name == "ml" || name == "mle") return Method::Cmle;
    return std::nullopt;
}

MomentEstimate fit_cls(const CountSeries& series) {
    require_estimable(series);
    const double n = static_cast<double>(series.size() - 1);
    double sx = 0.0, sy = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t t = 1; t < series.size(); ++t) {
        const double x = static_cast<double>(series[t]);
        const double y = static_cast<double>(series[t - 1]);
        sx += x;
        sy += y;
        sxy += x * y;
        syy += y * y;
    }
    const double den = n * syy - sy * sy;
    if (den == 0.0) throw DegenerateSeriesError("CLS: predecessor values are constant");
    const double alpha = (n * sxy - sx * sy) / den;
    const double mu = alpha == 1.0 ? kNaN : (sx - alpha * sy) / ((1.0 - alpha) * n);
    return {alpha, mu, alpha > 0.0 && alpha < 1.0};
}

MomentEstimate fit_yw(const CountSeries& series) {
    require_estimable(series);
    const double mean = sample_mean(series);
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double d = static_cast<double>(series[t]) - mean;
        den += d * d;
        if (t > 0) num += d * (static_cast<double>(series[t - 1]) - mean);
    }
    if (den == 0.0) throw DegenerateSeriesError("Yule-Walker: series is constant");
    const double alpha = num / den;
    return {alpha, mean, alpha > 0.0 && alpha < 1.0};
}

double invert_theta(double mu_hat, double alpha_hat) {
    require_alpha(alpha_hat);
    const double c = (1.0 - alpha_hat) * mu_hat;
    if (!(c > 0.0)) throw std::domain_error("theta inversion needs (1 - alpha) mu > 0");
    return pl_theta_from_mean(c);
}

bool FitResult::usable() const noexcept {
    return alpha_hat > 0.0 && alpha_hat < 1.0 && valid_parameter(innovation, param_hat) &&
           std::isfinite(loglik);
}

InarModel FitResult::model() const {
    if (!(alpha_hat > 0.0 && alpha_hat < 1.0) || !valid_parameter(innovation, param_hat)) {
        throw std::logic_error("fit result has no admissible parameter estimates");
    }
    return InarModel(family, alpha_hat, make_innovation(innovation, param_hat));
}

FitResult fit_moment(const CountSeries& series, Method method, const ThinningFamily& family,
                     InnovationKind innovation) {
    if (method == Method::Cmle) throw std::invalid_argument("fit_moment handles CLS and YW only");
    const MomentEstimate est = method == Method::Cls ? fit_cls(series) : fit_yw(series);

    FitResult r;
    r.method = method;
    r.family = family;
    r.innovation = innovation;
    r.alpha_hat = est.alpha_hat;
    r.mu_hat = est.mu_hat;
    r.param_hat = kNaN;
    r.loglik = kNaN;
    r.diagnostics.converged = true;
    r.diagnostics.alpha_out_of_range = !est.alpha_in_range;
    set_alpha_flags(r.diagnostics, est.alpha_hat);

    const double c = (1.0 - est.alpha_hat) * est.mu_hat;
    if (est.alpha_in_range && c > 0.0 && std::isfinite(c)) {
        r.param_hat = parameter_with_mean(innovation, c);
        r.loglik = loglik_at(series, family, innovation, r.alpha_hat, r.param_hat);
        if (method == Method::Cls && innovation == InnovationKind::PoissonLindley) {
            try {
                r.std_errors = cls_asymptotics(series, r.alpha_hat, r.param_hat, family).std_errors;
            } catch (const std::exception&) {
                r.std_errors.reset();
            }
        }
    }
    fill_criteria(r, series.size());
    return r;
}

FitResult fit_cmle(const CountSeries& series, const ThinningFamily& family,
                   InnovationKind innovation, const CmleOptions& options) {
    require_estimable(series);
    const double xbar = sample_mean(series);
    if (!(xbar > 0.0)) throw DegenerateSeriesError("CMLE: series is identically zero");

    FitDiagnostics diag;
    auto objective = [&](const std::vector<double>& u) {
        if (std::abs(u[0]) > kBox || std::abs(u[1]) > kBox) {
            return std::numeric_limits<double>::infinity();
        }
        const double ll = loglik_at(series, family, innovation, expit(u[0]),
                                    from_unconstrained(innovation, u[1]));
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };
    auto to_u = [&](double alpha, double param) {
        return std::vector<double>{logit(alpha), to_unconstrained(innovation, param)};
    };

    std::vector<std::vector<double>> starts;
    if (options.init) {
        const auto [a, p] = *options.init;
        if (!(a > 0.0 && a < 1.0) || !valid_parameter(innovation, p)) {
            throw std::invalid_argument("CMLE initial point is outside the parameter space");
        }
        starts.push_back(to_u(a, p));
    }
    for (Method m : {Method::Cls, Method::YuleWalker}) {
        try {
            const MomentEstimate est = m == Method::Cls ? fit_cls(series) : fit_yw(series);
            const double c = (1.0 - est.alpha_hat) * est.mu_hat;
            if (est.alpha_in_range && c > 0.0 && std::isfinite(c)) {
                starts.push_back(to_u(est.alpha_hat, parameter_with_mean(innovation, c)));
            }
        } catch (const DegenerateSeriesError&) {
            // Moment estimators undefined; the grid still supplies starts.
        }
    }

    struct GridPoint {
        double value;
        std::vector<double> u;
    };
    std::vector<GridPoint> grid;
    for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
            auto u = to_u(a, parameter_with_mean(innovation, xbar * (1.0 - a) * scale));
            ++diag.evaluations;
            grid.push_back({objective(u), std::move(u)});
        }
    }
    std::stable_sort(grid.begin(), grid.end(),
                     [](const GridPoint& x, const GridPoint& y) { return x.value < y.value; });
    for (std::size_t i = 0; i < std::min(options.grid_refinements, grid.size()); ++i) {
        if (std::isfinite(grid[i].value)) starts.push_back(grid[i].u);
    }

    // Drop starts that coincide.
    std::vector<std::vector<double>> unique;
    for (auto& s : starts) {
        const bool dup = std::any_of(unique.begin(), unique.end(), [&](const auto& v) {
            return std::abs(v[0] - s[0]) < 1e-8 && std::abs(v[1] - s[1]) < 1e-8;
        });
        if (!dup) unique.push_back(std::move(s));
    }

    std::optional<SimplexResult> best;
    for (const auto& start : unique) {
        SimplexResult run = nelder_mead(objective, start, options.simplex);
        ++diag.starts_tried;
        diag.iterations += run.iterations;
        diag.evaluations += run.evaluations;
        if (!run.converged || !std::isfinite(run.value)) continue;
        ++diag.starts_converged;
        if (!best) {
            best = std::move(run);
            continue;
        }
        const bool tie = std::abs(run.value - best->value) <= options.simplex.f_tolerance;
        if ((tie && run.x[0] < best->x[0]) || (!tie && run.value < best->value)) best = std::move(run);
    }
    if (!best) throw EstimationError("CMLE: no start converged", diag);

    // Central-difference gradient of the objective in the unconstrained space.
    {
        constexpr double h = 1e-5;
        double sq = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            auto up = best->x, down = best->x;
            up[i] += h;
            down[i] -= h;
            const double g = (objective(up) - objective(down)) / (2 * h);
            if (std::isfinite(g)) sq += g * g;
        }
        diag.evaluations += 4;
        diag.gradient_norm = std::sqrt(sq);
    }

    FitResult r;
    r.method = Method::Cmle;
    r.family = family;
    r.innovation = innovation;
    r.alpha_hat = expit(best->x[0]);
    r.param_hat = from_unconstrained(innovation, best->x[1]);
    r.loglik = -best->value;
    diag.converged = true;
    set_alpha_flags(diag, r.alpha_hat);
    r.diagnostics = diag;
    r.std_errors = observed_information_errors(series, family, innovation, r.alpha_hat, r.param_hat);
    fill_criteria(r, series.size());
    return r;
}

ClsAsymptotics cls_asymptotics(const CountSeries& series, double alpha_hat, double theta_hat,
                               const ThinningFamily& family) {
    require_estimable(series);
    require_alpha(alpha_hat);
    const PoissonLindley innovation(theta_hat);

    const double n = static_cast<double>(series.size());
    const double mu1 = sample_mean(series);
    double mu2 = 0.0, mu3 = 0.0, centered = 0.0;
    for (Count v : series) {
        const double x = static_cast<double>(v);
        mu2 += x * x / n;
        mu3 += x * x * x / n;
        centered += (x - mu1) * (x - mu1) / n;
    }
    if (!(centered > 0.0)) throw DegenerateSeriesError("CLS asymptotics: series is constant");

    const double delta = family.delta(alpha_hat);
    const double s2 = innovation.variance();
    const double t = theta_hat;
    const double q = t * t + 4.0 * t + 2.0;
    const double t2p = t * t * (t + 1.0) * (t + 1.0);

    // E[X^r V(X)] with conditional variance V(x) = delta x + sigma_W^2.
    const double a = delta * mu3 + mu2 * s2;
    const double b = delta * mu2 + mu1 * s2;
    const double d = delta * mu1 + s2;

    ClsAsymptotics out{};
    out.c = t2p / (centered * q);
    out.r11 = q * q / (t2p * t2p) * ((a - mu1 * b) + mu1 * (mu1 * d - b));
    out.r12 = q / t2p * (mu1 * a - mu2 * b + mu1 * mu2 * d - mu1 * mu1 * b);
    out.r21 = out.r12;
    out.r22 = mu1 * mu1 * a - 2.0 * mu1 * mu2 * b + mu2 * mu2 * d;

    const double scale = out.c * out.c / (n - 1.0);
    out.covariance = {{{scale * out.r11, scale * out.r12}, {scale * out.r21, scale * out.r22}}};
    out.std_errors = {std::sqrt(std::max(0.0, out.covariance[0][0])),
                      std::sqrt(std::max(0.0, out.covariance[1][1]))};
    return out;
}

}  // namespace psinar
