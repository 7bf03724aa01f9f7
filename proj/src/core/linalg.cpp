// SPDX-License-Identifier: Apache-2.0
#include "linalg.hpp"

#include "error.hpp"

#include <fmt/format.h>
#include <lapacke.h>

namespace cvm {

SymmetricEigen symmetric_eigen(Eigen::MatrixXd a) {
    if (a.rows() != a.cols()) throw UsageError("eigendecomposition needs a square matrix");
    const auto n = static_cast<lapack_int>(a.rows());
    Eigen::VectorXd values(n);
    if (n > 0) {
        const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, a.data(), n, values.data());
        if (info != 0) throw NumericalError(fmt::format("symmetric eigendecomposition failed (dsyevd info {})", info));
    }
    // LAPACK returns ascending order.
    SymmetricEigen out;
    out.values = values.reverse();
    out.vectors = a.rowwise().reverse();
    return out;
}

}  // namespace cvm
