#include "countgest/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace countgest {

AdamState::AdamState(std::size_t rows, std::size_t cols, double lr)
    : m(rows, cols), v(rows, cols), learning_rate(lr) {}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state) {
    if (!param.same_shape(grad) || !param.same_shape(state.m) || !param.same_shape(state.v)) {
        throw std::invalid_argument("adam_step: shape mismatch between param, grad and moments");
    }
    if (state.beta1 <= 0.0 || state.beta1 >= 1.0 || state.beta2 <= 0.0 || state.beta2 >= 1.0 ||
        state.epsilon <= 0.0) {
        throw std::invalid_argument("adam_step: hyperparameters out of range");
    }

    state.step += 1;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));

    double* p = param.data();
    const double* g = grad.data();
    double* m = state.m.data();
    double* v = state.v.data();
    const std::size_t n = param.size();
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("glorot_uniform: zero dimension");
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (double& value : m) {
        value = rng.uniform(-bound, bound);
    }
    return m;
}

} // namespace countgest
