#include "psinar/analysis.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

namespace psinar {

PredictionTrace predict(const CountSeries& series, double alpha_hat, double innovation_mean,
                        PredictionMode mode) {
    require_alpha(alpha_hat);
    if (!(innovation_mean > 0.0) || !std::isfinite(innovation_mean)) {
        throw std::invalid_argument("innovation mean must be positive");
    }
    PredictionTrace trace{alpha_hat, innovation_mean, mode, {series.begin(), series.end()}, {}, {}};
    trace.predicted.reserve(series.size());
    trace.residuals.reserve(series.size());
    double previous = innovation_mean / (1.0 - alpha_hat);
    for (std::size_t i = 0; i < series.size(); ++i) {
        double x_hat = previous;
        if (i > 0) {
            const double lag =
                mode == PredictionMode::ObservedLag ? static_cast<double>(series[i - 1]) : previous;
            x_hat = alpha_hat * lag + innovation_mean;
        }
        trace.predicted.push_back(x_hat);
        trace.residuals.push_back(static_cast<double>(series[i]) - x_hat);
        previous = x_hat;
    }
    return trace;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ModelTag tag) noexcept {
    switch (tag) {
        case ModelTag::NBINARPL: return "NBINARPL";
        case ModelTag::BINARPL: return "BINARPL";
        case ModelTag::PINARPL: return "PINARPL";
        case ModelTag::INARG: return "INARG";
        case ModelTag::INARP: return "INARP";
    }
    return "unknown";
}

ThinningFamily family_of(ModelTag tag) {
    switch (tag) {
        case ModelTag::NBINARPL: return ThinningFamily::geometric();
        case ModelTag::PINARPL: return ThinningFamily::poisson();
        default: return ThinningFamily::bernoulli();
    }
}

InnovationKind innovation_of(ModelTag tag) noexcept {
    switch (tag) {
        case ModelTag::INARG: return InnovationKind::Geometric;
        case ModelTag::INARP: return InnovationKind::Poisson;
        default: return InnovationKind::PoissonLindley;
    }
}

const ComparisonRow& ComparisonTable::row(ModelTag tag) const {
    for (const auto& r : rows) {
        if (r.model == tag) return r;
    }
    throw std::out_of_range("model not in comparison table");
}

ComparisonTable compare_models(const CountSeries& series, const CmleOptions& options) {
    ComparisonTable table;
    table.n_transitions = series.size() - 1;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    for (ModelTag tag : kAllModels) {
        ComparisonRow row{tag, std::nullopt, std::nullopt, std::nullopt, {}, nan, nan};
        const ThinningFamily family = family_of(tag);
        const InnovationKind innovation = innovation_of(tag);
        auto note = [&row](std::string_view what, const std::exception& e) {
            if (row.error.empty()) row.error = std::string(what) + ": " + e.what();
        };
        try {
            row.cls = fit_moment(series, Method::Cls, family, innovation);
        } catch (const std::exception& e) {
            note("CLS", e);
        }
        try {
            row.yw = fit_moment(series, Method::YuleWalker, family, innovation);
        } catch (const std::exception& e) {
            note("YW", e);
        }
        try {
            row.cmle = fit_cmle(series, family, innovation, options);
            row.aic = row.cmle->aic;
            row.bic = row.cmle->bic;
        } catch (const std::exception& e) {
            note("CMLE", e);
        }
        table.rows.push_back(std::move(row));
    }

    double best_aic = std::numeric_limits<double>::infinity();
    double best_bic = best_aic;
    for (const auto& row : table.rows) {
        if (!row.cmle) continue;
        if (row.aic < best_aic) {
            best_aic = row.aic;
            table.best_by_aic = row.model;
        }
        if (row.bic < best_bic) {
            best_bic = row.bic;
            table.best_by_bic = row.model;
        }
    }
    if (!table.best_by_aic) {
        throw EstimationError("no candidate model could be fitted: " + table.rows.front().error, {});
    }
    return table;
}

// ---------------------------------------------------------------------------

const McCell& McReport::cell(std::size_t length, Method method, std::string_view parameter) const {
    for (const auto& c : cells) {
        if (c.length == length && c.method == method && c.parameter == parameter) return c;
    }
    throw std::out_of_range("Monte Carlo cell not computed");
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

struct ReplicateEstimate {
    bool ok = false;
    double alpha = 0.0;
    double theta = 0.0;
    std::optional<double> alpha_se;
    std::optional<double> theta_se;
};

using ReplicateOutcome = std::vector<ReplicateEstimate>;  // indexed like config.methods

ReplicateOutcome fit_replicate(const McConfig& config, const InarModel& model, std::size_t length,
                               std::uint64_t seed) {
    Rng rng(seed);
    ReplicateOutcome out(config.methods.size());
    std::optional<CountSeries> series;
    try {
        series.emplace(simulate(model, length, config.burn_in, rng));
    } catch (const std::exception&) {
        return out;
    }
    for (std::size_t i = 0; i < config.methods.size(); ++i) {
        const Method method = config.methods[i];
        ReplicateEstimate& est = out[i];
        try {
            if (method == Method::Cmle) {
                const FitResult fit = fit_cmle(*series, config.family, InnovationKind::PoissonLindley,
                                               config.cmle);
                est = {true, fit.alpha_hat, fit.param_hat, std::nullopt, std::nullopt};
                continue;
            }
            const MomentEstimate m = method == Method::Cls ? fit_cls(*series) : fit_yw(*series);
            if (!m.alpha_in_range) continue;
            const double theta = invert_theta(m.mu_hat, m.alpha_hat);
            est = {true, m.alpha_hat, theta, std::nullopt, std::nullopt};
            if (method == Method::Cls) {
                const auto asym = cls_asymptotics(*series, m.alpha_hat, theta, config.family);
                est.alpha_se = asym.std_errors.first;
                est.theta_se = asym.std_errors.second;
            }
        } catch (const std::exception&) {
            est = {};
        }
    }
    return out;
}

McCell aggregate(const std::vector<ReplicateOutcome>& outcomes, std::size_t method_index,
                 Method method, bool alpha, double truth, std::size_t length) {
    McCell cell{length, method, alpha ? "alpha" : "theta", truth, 0, 0, 0, 0, 0, 0, std::nullopt};
    double sum = 0.0, sum_sq_err = 0.0, se_sum = 0.0;
    std::size_t se_count = 0;
    for (const auto& o : outcomes) {
        const ReplicateEstimate& e = o[method_index];
        if (!e.ok) {
            ++cell.failures;
            continue;
        }
        const double v = alpha ? e.alpha : e.theta;
        ++cell.replicates;
        sum += v;
        sum_sq_err += (v - truth) * (v - truth);
        if (const auto& se = alpha ? e.alpha_se : e.theta_se) {
            se_sum += *se;
            ++se_count;
        }
    }
    if (cell.replicates == 0) {
        cell.ae = cell.abias = cell.rmse = cell.sd = std::numeric_limits<double>::quiet_NaN();
        return cell;
    }
    const double n = static_cast<double>(cell.replicates);
    cell.ae = sum / n;
    cell.abias = cell.ae - truth;
    cell.rmse = std::sqrt(sum_sq_err / n);
    double ss = 0.0;
    for (const auto& o : outcomes) {
        const ReplicateEstimate& e = o[method_index];
        if (e.ok) ss += std::pow((alpha ? e.alpha : e.theta) - cell.ae, 2);
    }
    cell.sd = cell.replicates > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    if (se_count > 0) cell.mean_std_error = se_sum / static_cast<double>(se_count);
    return cell;
}

}  // namespace

McReport run_mc_study(const McConfig& config) {
    if (config.replicates == 0) throw std::invalid_argument("replicates must be at least 1");
    if (config.lengths.empty()) throw std::invalid_argument("at least one series length is required");
    for (std::size_t len : config.lengths) {
        if (len < 3) throw std::invalid_argument("series length must be at least 3");
    }
    const InarModel model(config.family, config.alpha, PoissonLindley(config.theta));

    unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, threads);

    McReport report{config, {}};
    for (std::size_t li = 0; li < config.lengths.size(); ++li) {
        const std::size_t length = config.lengths[li];
        std::vector<ReplicateOutcome> outcomes(config.replicates);
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t r = next++; r < config.replicates; r = next++) {
                outcomes[r] = fit_replicate(config, model, length, replicate_seed(config.seed, li, r));
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        }
        // Fixed reduction order: replicate index.
        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            report.cells.push_back(
                aggregate(outcomes, mi, config.methods[mi], true, config.alpha, length));
            report.cells.push_back(
                aggregate(outcomes, mi, config.methods[mi], false, config.theta, length));
        }
    }
    return report;
}

}  // namespace psinar
