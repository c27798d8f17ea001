#pragma once

#include "countgest/matrix.hpp"
#include "countgest/rng.hpp"

#include <cstddef>

namespace countgest {

/// Per-parameter Adam optimizer state (first/second moment estimates).
struct AdamState {
    std::size_t step = 0;
    Matrix m;
    Matrix v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 0.001;

    AdamState() = default;
    AdamState(std::size_t rows, std::size_t cols, double lr);
};

/// One bias-corrected Adam update. Mutates the parameter and the state.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state);

/// Glorot (Xavier) uniform initialization: entries uniform in [-b, b]
/// with b = sqrt(6 / (fan_in + fan_out)), fan_in = cols, fan_out = rows.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

} // namespace countgest
