#include "psinar/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace psinar {

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const SimplexOptions& options) {
    const std::size_t n = start.size();
    if (n == 0) throw std::invalid_argument("nelder_mead needs at least one coordinate");

    SimplexResult result;
    auto eval = [&](const std::vector<double>& x) {
        ++result.evaluations;
        const double v = objective(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> vertex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) vertex[i + 1][i] += options.initial_step;
    std::vector<double> value(n + 1);
    for (std::size_t i = 0; i <= n; ++i) value[i] = eval(vertex[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);

    auto point_along = [&](double coef, std::vector<double>& out, const std::vector<double>& worst) {
        for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (worst[j] - centroid[j]);
    };

    for (result.iterations = 0; result.iterations < options.max_iterations; ++result.iterations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double spread = value[worst] - value[best];
        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                size = std::max(size, std::abs(vertex[i][j] - vertex[best][j]));
            }
        }
        if (std::isfinite(spread) && spread <= options.f_tolerance && size <= options.x_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += vertex[i][j] / static_cast<double>(n);
        }

        point_along(-1.0, trial, vertex[worst]);
        const double reflected = eval(trial);
        if (reflected < value[best]) {
            point_along(-2.0, trial2, vertex[worst]);
            const double expanded = eval(trial2);
            if (expanded < reflected) {
                vertex[worst] = trial2;
                value[worst] = expanded;
            } else {
                vertex[worst] = trial;
                value[worst] = reflected;
            }
            continue;
        }
        if (reflected < value[second_worst]) {
            vertex[worst] = trial;
            value[worst] = reflected;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst point.
        const bool outside = reflected < value[worst];
        point_along(outside ? -0.5 : 0.5, trial2, vertex[worst]);
        const double contracted = eval(trial2);
        if (contracted < (outside ? reflected : value[worst])) {
            vertex[worst] = trial2;
            value[worst] = contracted;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) {
                vertex[i][j] = vertex[best][j] + 0.5 * (vertex[i][j] - vertex[best][j]);
            }
            value[i] = eval(vertex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(
        std::min_element(value.begin(), value.end()) - value.begin());
    result.x = vertex[best];
    result.value = value[best];
    return result;
}

}  // namespace psinar
