#include "psinar/information_criteria.hpp"

#include <cmath>
#include <stdexcept>

namespace psinar {

InformationCriteria information_criteria(double loglik, int n_params, double n_transitions) {
    if (n_params < 1) throw std::invalid_argument("n_params must be positive");
    if (!(n_transitions >= 1.0)) throw std::invalid_argument("n_transitions must be at least 1");
    const double k = static_cast<double>(n_params);
    return {-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * std::log(n_transitions)};
}

}  // namespace psinar
