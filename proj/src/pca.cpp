#include "countgest/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace countgest {

double PcaModel::cumulative_fraction() const {
    double sum = 0.0;
    for (double f : variance_fractions) sum += f;
    return sum;
}

std::vector<double> PcaModel::project(const double* sample) const {
    const std::size_t f = basis.rows();
    const std::size_t k = basis.cols();
    std::vector<double> out(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < f; ++i) {
            acc += (sample[i] - mean[i]) * basis(i, j);
        }
        out[j] = acc;
    }
    return out;
}

PcaModel pca_fit(const Matrix& samples, std::size_t k) {
    const std::size_t n = samples.rows();
    const std::size_t f = samples.cols();
    if (n < 2) {
        throw std::invalid_argument("pca_fit: need at least 2 samples");
    }
    if (k < 1 || k > std::min(n - 1, f)) {
        throw std::invalid_argument("pca_fit: k out of range");
    }

    PcaModel model;
    model.mean.assign(f, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) {
            model.mean[j] += samples(i, j);
        }
    }
    for (double& m : model.mean) m /= static_cast<double>(n);

    Eigen::MatrixXd centered(n, f);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j) {
            centered(i, j) = samples(i, j) - model.mean[j];
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();

    double total_variance = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        total_variance += sigma(i) * sigma(i);
    }
    if (total_variance <= 0.0) {
        throw std::invalid_argument("pca_fit: samples carry zero variance, basis undefined");
    }

    model.basis = Matrix(f, k);
    model.variance_fractions.assign(k, 0.0);
    const Eigen::MatrixXd& v = svd.matrixV();
    for (std::size_t j = 0; j < k; ++j) {
        // sign convention: largest-magnitude entry positive
        Eigen::Index max_row = 0;
        v.col(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff(&max_row);
        const double sign = v(max_row, static_cast<Eigen::Index>(j)) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < f; ++i) {
            model.basis(i, j) = sign * v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        model.variance_fractions[j] =
            sigma(static_cast<Eigen::Index>(j)) * sigma(static_cast<Eigen::Index>(j)) / total_variance;
    }
    return model;
}

} // namespace countgest
