#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace psinar {

struct SimplexOptions {
    double f_tolerance = 1e-10;  // spread of objective values over the simplex
    double x_tolerance = 1e-8;   // max vertex distance from the best vertex
    std::size_t max_iterations = 2000;
    double initial_step = 0.25;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Nelder-Mead minimization of an unconstrained objective. Non-finite
/// objective values are treated as +inf.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const SimplexOptions& options = {});

}  // namespace psinar
