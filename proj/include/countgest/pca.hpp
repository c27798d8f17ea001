#pragma once

#include "countgest/matrix.hpp"

#include <cstddef>
#include <vector>

namespace countgest {

/// Principal component basis fitted to a sample matrix.
struct PcaModel {
    Matrix basis;                            ///< n_features x k, orthonormal columns
    std::vector<double> variance_fractions;  ///< per component, descending
    std::vector<double> mean;                ///< n_features

    std::size_t components() const { return basis.cols(); }

    double cumulative_fraction() const;

    /// Project one sample (length n_features) onto the basis.
    std::vector<double> project(const double* sample) const;
};

/// Mean-center `samples` (n_samples x n_features) and keep the top `k`
/// right singular vectors of the centered matrix. Basis vector signs are
/// fixed so the largest-magnitude entry of each column is positive.
/// Throws if the samples carry no variance or k is out of range.
PcaModel pca_fit(const Matrix& samples, std::size_t k);

} // namespace countgest
