// SPDX-License-Identifier: Apache-2.0
#include "kernel.hpp"

#include "error.hpp"
#include "parallel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace cvm {

namespace {

void check_dims(Eigen::Index a, Eigen::Index b) {
    if (a != b) throw UsageError(fmt::format("kernel dimension mismatch: {} vs {}", a, b));
}

// Above this dimension the |x|^2 + |z|^2 - 2 x.z route through GEMM pays off;
// below it the direct differences are both faster and exact at x == z.
constexpr Eigen::Index gemm_dim_threshold = 64;

constexpr Eigen::Index rows_per_task = 64;

}  // namespace

KernelParams KernelParams::from_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DataError(fmt::format("invalid RBF gamma {}", gamma));
    return KernelParams{1.0 / std::sqrt(2.0 * gamma), gamma};
}

void KernelParams::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError(fmt::format("RBF sigma must be positive and finite, got {}", sigma));
}

Matrix Kernel::matrix(const Matrix &x, const Matrix &z) const {
    check_dims(x.cols(), z.cols());
    Matrix k(x.rows(), z.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < z.rows(); ++j) k(i, j) = value(x.row(i), z.row(j));
    }
    return k;
}

Matrix Kernel::weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix & /*gram*/, const Matrix &weights) const {
    check_dims(x.cols(), z.cols());
    Matrix g = Matrix::Zero(z.rows(), z.cols());
    for (Eigen::Index k = 0; k < z.rows(); ++k) {
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            if (weights(i, k) != 0.0) g.row(k) += weights(i, k) * grad_z(x.row(i), z.row(k));
        }
    }
    return g;
}

Matrix Kernel::outer_weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix &gram, const Vector &u,
                                     const Vector &v) const {
    return weighted_grad_z(x, z, gram, u * v.transpose());
}

RbfKernel::RbfKernel(KernelParams params) : params_(params) { params_.validate(); }

double RbfKernel::value(ConstRow x, ConstRow z) const {
    check_dims(x.size(), z.size());
    return std::exp(-params_.gamma() * (x - z).squaredNorm());
}

Eigen::RowVectorXd RbfKernel::grad_z(ConstRow x, ConstRow z) const {
    check_dims(x.size(), z.size());
    const double k = std::exp(-params_.gamma() * (x - z).squaredNorm());
    return (2.0 * params_.gamma() * k) * (x - z);
}

Matrix RbfKernel::matrix(const Matrix &x, const Matrix &z) const {
    check_dims(x.cols(), z.cols());
    const double gamma = params_.gamma();
    Matrix k(x.rows(), z.rows());
    const Eigen::Index n_tasks = (x.rows() + rows_per_task - 1) / rows_per_task;

    if (x.cols() > gemm_dim_threshold) {
        const Eigen::VectorXd zn = z.rowwise().squaredNorm();
        parallel_for(static_cast<std::size_t>(n_tasks), [&](std::size_t t) {
            const Eigen::Index lo = static_cast<Eigen::Index>(t) * rows_per_task;
            const Eigen::Index len = std::min(rows_per_task, x.rows() - lo);
            auto xs = x.middleRows(lo, len);
            Matrix d = -2.0 * (xs * z.transpose());
            d.colwise() += xs.rowwise().squaredNorm();
            d.rowwise() += zn.transpose();
            k.middleRows(lo, len) = (-gamma * d.array().max(0.0)).exp().matrix();
        });
        return k;
    }

    parallel_for(static_cast<std::size_t>(n_tasks), [&](std::size_t t) {
        const Eigen::Index lo = static_cast<Eigen::Index>(t) * rows_per_task;
        const Eigen::Index hi = std::min(lo + rows_per_task, x.rows());
        for (Eigen::Index i = lo; i < hi; ++i) {
            for (Eigen::Index j = 0; j < z.rows(); ++j) k(i, j) = (x.row(i) - z.row(j)).squaredNorm();
        }
        k.middleRows(lo, hi - lo) = (-gamma * k.middleRows(lo, hi - lo).array()).exp().matrix();
    });
    return k;
}

Matrix RbfKernel::weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix &gram, const Matrix &weights) const {
    check_dims(x.cols(), z.cols());
    // sum_i w_ik K_ik (x_i - z_k) / sigma^2
    const Matrix wk = weights.cwiseProduct(gram);
    Matrix g = wk.transpose() * x;
    g -= wk.colwise().sum().transpose().asDiagonal() * z;
    return (2.0 * params_.gamma()) * g;
}

Matrix RbfKernel::outer_weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix &gram, const Vector &u,
                                        const Vector &v) const {
    check_dims(x.cols(), z.cols());
    // v_k sum_i u_i K_ik (x_i - z_k) / sigma^2
    const Matrix gu = gram.transpose() * (u.asDiagonal() * x);
    const Vector s = gram.transpose() * u;
    return (2.0 * params_.gamma()) * (v.asDiagonal() * (gu - s.asDiagonal() * z));
}

double rbf(ConstRow x, ConstRow z, const KernelParams &p) { return RbfKernel(p).value(x, z); }

Eigen::RowVectorXd rbf_grad_z(ConstRow x, ConstRow z, const KernelParams &p) { return RbfKernel(p).grad_z(x, z); }

Matrix kernel_matrix(const Matrix &x, const Matrix &z, const KernelParams &p) { return RbfKernel(p).matrix(x, z); }

Vector kernel_matvec(const Matrix &x, const Matrix &z, const Vector &w, const KernelParams &p) {
    check_dims(x.cols(), z.cols());
    if (w.size() != z.rows()) throw UsageError(fmt::format("kernel_matvec: {} weights for {} columns", w.size(), z.rows()));
    constexpr Eigen::Index block = 256;
    const RbfKernel kernel(p);
    Vector out(x.rows());
    const Eigen::Index n_tasks = (x.rows() + block - 1) / block;
    parallel_for(static_cast<std::size_t>(n_tasks), [&](std::size_t t) {
        const Eigen::Index lo = static_cast<Eigen::Index>(t) * block;
        const Eigen::Index len = std::min(block, x.rows() - lo);
        const Matrix xs = x.middleRows(lo, len);
        out.segment(lo, len) = kernel.matrix(xs, z) * w;
    });
    return out;
}

}  // namespace cvm
