#include "psinar/process.hpp"

#include "psinar/thinning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace psinar {

CountSeries::CountSeries(std::vector<Count> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw std::invalid_argument("a count series needs at least two values");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] < 0) {
            throw std::invalid_argument("negative count at position " + std::to_string(i + 1));
        }
    }
}

Count CountSeries::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

InarModel::InarModel(ThinningFamily family, double alpha, InnovationSpec innovation)
    : family_(std::move(family)), alpha_(alpha), innovation_(std::move(innovation)), delta_(0.0) {
    require_alpha(alpha);
    delta_ = family_.delta(alpha);
}

Moments model_moments(const InarModel& model) {
    const Moments w = innovation_moments(model.innovation());
    const double a = model.alpha();
    const double mean = w.mean / (1.0 - a);
    const double variance = (model.delta() / (1.0 - a) * w.mean + w.variance) / (1.0 - a * a);
    return {mean, variance};
}

double autocorrelation(const InarModel& model, Count k) {
    if (k < 0) throw std::invalid_argument("lag must be non-negative");
    return std::pow(model.alpha(), static_cast<double>(k));
}

Moments conditional_moments(const InarModel& model, Count x) {
    if (x < 0) throw std::invalid_argument("state must be non-negative");
    const Moments w = innovation_moments(model.innovation());
    const double xd = static_cast<double>(x);
    return {model.alpha() * xd + w.mean, model.delta() * xd + w.variance};
}

std::vector<Count> simulate(const InarModel& model, std::size_t length, std::size_t burn_in,
                            Rng& rng) {
    if (length == 0) throw std::invalid_argument("simulation length must be positive");
    std::vector<Count> out;
    out.reserve(length);
    Count x = 0;
    for (std::size_t t = 0; t < burn_in + length; ++t) {
        x = thin(model.family(), model.alpha(), x, rng) + innovation_sample(model.innovation(), rng);
        if (t >= burn_in) out.push_back(x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transition kernel

TransitionKernel::TransitionKernel(const InarModel& model, Count max_state)
    : model_(&model),
      max_state_(std::max<Count>(max_state, 0)),
      log_alpha_(std::log(model.alpha())),
      log1m_alpha_(std::log1p(-model.alpha())),
      log1p_alpha_(std::log1p(model.alpha())) {
    log_innovation_.resize(static_cast<std::size_t>(max_state_) + 1);
    for (Count w = 0; w <= max_state_; ++w) {
        log_innovation_[w] = innovation_log_pmf(model.innovation(), w);
    }
    if (model.family().kind() == ThinningFamily::Kind::PowerSeries) {
        custom_thinned_.resize(static_cast<std::size_t>(max_state_) + 1);
        for (Count l = 1; l <= max_state_; ++l) {
            auto probs = thinned_pmf_vector(model.family(), model.alpha(), l, max_state_);
            for (double& p : probs) p = p > 0.0 ? std::log(p) : kNegInf;
            custom_thinned_[l] = std::move(probs);
        }
    }
}

double TransitionKernel::log_innovation(Count w) const {
    if (w <= max_state_) return log_innovation_[static_cast<std::size_t>(w)];
    return innovation_log_pmf(model_->innovation(), w);
}

double TransitionKernel::log_thinned(Count l, Count m) const {
    const double ld = static_cast<double>(l);
    const double md = static_cast<double>(m);
    switch (model_->family().kind()) {
        case ThinningFamily::Kind::Bernoulli:
            return log_factorial(l) - log_factorial(m) - log_factorial(l - m) + md * log_alpha_ +
                   (ld - md) * log1m_alpha_;
        case ThinningFamily::Kind::Geometric:
            return log_factorial(l + m - 1) - log_factorial(m) - log_factorial(l - 1) -
                   ld * log1p_alpha_ + md * (log_alpha_ - log1p_alpha_);
        case ThinningFamily::Kind::Poisson:
            return -model_->alpha() * ld + md * (log_alpha_ + std::log(ld)) - log_factorial(m);
        case ThinningFamily::Kind::PowerSeries:
            if (l <= max_state_ && m <= max_state_) return custom_thinned_[l][m];
            return thinned_log_pmf(model_->family(), model_->alpha(), l, m);
    }
    return kNegInf;
}

double TransitionKernel::log_prob(Count l, Count k) const {
    if (l < 0 || k < 0) throw std::invalid_argument("states must be non-negative");
    if (l == 0) return log_innovation(k);

    Count m_max = k;
    if (auto top = model_->family().max_support()) m_max = std::min(k, *top * l);

    // Two-pass log-sum-exp over the convolution terms.
    constexpr std::size_t kStackTerms = 512;
    std::array<double, kStackTerms> stack_buf;
    std::vector<double> heap_buf;
    double* terms = stack_buf.data();
    const auto n = static_cast<std::size_t>(m_max) + 1;
    if (n > kStackTerms) {
        heap_buf.resize(n);
        terms = heap_buf.data();
    }
    double top = kNegInf;
    for (Count m = 0; m <= m_max; ++m) {
        const double v = log_thinned(l, m) + log_innovation(k - m);
        terms[m] = v;
        top = std::max(top, v);
    }
    if (top == kNegInf) return kNegInf;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::exp(terms[i] - top);
    return top + std::log(sum);
}

double log_transition_prob(const InarModel& model, Count l, Count k) {
    return TransitionKernel(model, std::max(l, k)).log_prob(l, k);
}

double transition_prob(const InarModel& model, Count l, Count k) {
    return std::exp(log_transition_prob(model, l, k));
}

TransitionRow transition_row(const InarModel& model, Count l, Count cap) {
    if (cap < 1) throw std::invalid_argument("cap must be at least 1");
    const TransitionKernel kernel(model, std::max(l, cap));
    TransitionRow row;
    row.probs.resize(static_cast<std::size_t>(cap) + 1);
    double total = 0.0;
    for (Count k = 0; k <= cap; ++k) {
        row.probs[k] = std::exp(kernel.log_prob(l, k));
        total += row.probs[k];
    }
    row.tail = std::max(0.0, 1.0 - total);
    return row;
}

Count default_cap(const InarModel& model, Count max_value) {
    const Moments c = conditional_moments(model, max_value);
    const double cap = static_cast<double>(max_value) + 10.0 * std::sqrt(c.variance);
    return std::max<Count>(50, static_cast<Count>(std::ceil(cap)));
}

double log_likelihood(const InarModel& model, std::span<const Count> series) {
    if (series.size() < 2) throw std::invalid_argument("likelihood needs at least two values");
    const Count top = *std::max_element(series.begin(), series.end());
    if (*std::min_element(series.begin(), series.end()) < 0) {
        throw std::invalid_argument("negative count in series");
    }
    const TransitionKernel kernel(model, top);
    double total = 0.0;
    for (std::size_t t = 1; t < series.size(); ++t) total += kernel.log_prob(series[t - 1], series[t]);
    return total;
}

double log_likelihood(const InarModel& model, const CountSeries& series) {
    return log_likelihood(model, series.values());
}

std::vector<double> stationary_distribution(const InarModel& model, Count cap, double tol,
                                            std::size_t max_iterations) {
    if (cap < 1) throw std::invalid_argument("cap must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    const Moments m = model_moments(model);
    if (static_cast<double>(cap) < m.mean + 10.0 * std::sqrt(m.variance)) {
        throw std::invalid_argument("cap " + std::to_string(cap) +
                                    " is below mean + 10 standard deviations");
    }

    const auto n = static_cast<std::size_t>(cap) + 1;
    const TransitionKernel kernel(model, cap);
    std::vector<double> kernel_matrix(n * n);
    for (std::size_t l = 0; l < n; ++l) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double p = std::exp(kernel.log_prob(static_cast<Count>(l), static_cast<Count>(k)));
            kernel_matrix[l * n + k] = p;
            row_sum += p;
        }
        for (std::size_t k = 0; k < n; ++k) kernel_matrix[l * n + k] /= row_sum;
    }

    std::vector<double> current(kernel_matrix.begin(), kernel_matrix.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<double> next(n);
    double residual = 1.0;
    for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t l = 0; l < n; ++l) {
            const double w = current[l];
            if (w == 0.0) continue;
            const double* row = &kernel_matrix[l * n];
            for (std::size_t k = 0; k < n; ++k) next[k] += w * row[k];
        }
        double total = 0.0;
        for (double v : next) total += v;
        residual = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            next[k] /= total;
            residual += std::abs(next[k] - current[k]);
        }
        residual *= 0.5;
        current.swap(next);
        if (residual < tol) return current;
    }
    throw ConvergenceError("stationary distribution did not converge", residual, max_iterations);
}

double joint_log_pmf(const InarModel& model, std::span<const Count> series,
                     std::span<const double> initial_dist) {
    if (series.empty()) throw std::invalid_argument("series is empty");
    const Count first = series.front();
    if (first < 0 || static_cast<std::size_t>(first) >= initial_dist.size()) {
        throw std::invalid_argument("first observation lies outside the initial distribution");
    }
    const double p0 = initial_dist[static_cast<std::size_t>(first)];
    const double head = p0 > 0.0 ? std::log(p0) : kNegInf;
    if (series.size() == 1) return head;
    return head + log_likelihood(model, series);
}

}  // namespace psinar
