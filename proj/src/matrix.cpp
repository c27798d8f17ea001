#include "countgest/matrix.hpp"

#include <cmath>

namespace countgest {

double sum_squared_error(const Matrix& output, const Matrix& target) {
    if (!output.same_shape(target)) {
        throw std::invalid_argument("sum_squared_error: shape mismatch");
    }
    double sum = 0.0;
    const double* a = output.data();
    const double* b = target.data();
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

bool all_finite(const Matrix& m) {
    for (double v : m) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace countgest
