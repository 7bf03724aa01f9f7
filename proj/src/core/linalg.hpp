// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace cvm {

struct SymmetricEigen {
    Eigen::VectorXd values;   ///< nonincreasing
    Eigen::MatrixXd vectors;  ///< orthonormal columns, matching `values`
};

/// Eigendecomposition of a symmetric matrix (LAPACK dsyevd). Only the lower
/// triangle is read. Throws NumericalError if LAPACK fails to converge.
SymmetricEigen symmetric_eigen(Eigen::MatrixXd a);

}  // namespace cvm
