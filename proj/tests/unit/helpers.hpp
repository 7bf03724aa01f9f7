// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "data.hpp"
#include "svm.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace cvm::test {

inline Matrix random_matrix(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64 &rng, Eigen::Index n, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

/// Two Gaussian blobs at -shift and +shift along the first axis, labels -1/+1.
inline Dataset blobs(std::mt19937_64 &rng, std::size_t n_per_class, Eigen::Index dim, double shift = 1.0) {
    Matrix x = random_matrix(rng, static_cast<Eigen::Index>(2 * n_per_class), dim);
    std::vector<int> y(2 * n_per_class);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = i < n_per_class ? -1 : +1;
        x(static_cast<Eigen::Index>(i), 0) += y[i] * shift;
    }
    return Dataset(std::move(x), std::move(y));
}

/// Random expansion whose coefficient signs alternate.
inline SvmModel random_model(std::mt19937_64 &rng, Eigen::Index n_sv, Eigen::Index dim, double sigma = 1.0) {
    SvmModel m;
    m.support_vectors = random_matrix(rng, n_sv, dim);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    m.coef.resize(n_sv);
    for (Eigen::Index i = 0; i < n_sv; ++i) m.coef[i] = (i % 2 == 0 ? 1.0 : -1.0) * u(rng);
    m.bias = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    m.kernel = KernelParams{sigma};
    return m;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace cvm::test
