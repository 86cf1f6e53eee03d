#pragma once

#include <cstddef>

namespace psinar {

struct InformationCriteria {
    double aic;
    double bic;
};

/// aic = -2 loglik + 2 k, bic = -2 loglik + k log(n). With a likelihood
/// conditional on x_1, n is the number of transitions T - 1.
InformationCriteria information_criteria(double loglik, int n_params, double n_transitions);

}  // namespace psinar
