// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "data.hpp"

#include <Eigen/Dense>

#include <memory>

namespace cvm {

using ConstRow = Eigen::Ref<const Eigen::RowVectorXd>;

/// RBF bandwidth. K(x, z) = exp(-|x - z|^2 / (2 sigma^2)).
struct KernelParams {
    double sigma = 1.0;
    /// Set by from_gamma so that a model read from a file is written back
    /// with the same gamma; zero otherwise.
    double exact_gamma = 0.0;

    /// LibSVM parameterization exp(-gamma |x - z|^2), gamma = 1 / (2 sigma^2).
    [[nodiscard]] double gamma() const noexcept { return exact_gamma > 0.0 ? exact_gamma : 1.0 / (2.0 * sigma * sigma); }
    static KernelParams from_gamma(double gamma);
    /// Throws UsageError unless sigma is positive and finite.
    void validate() const;

    bool operator==(const KernelParams &) const = default;
};

/**
 * A kernel that can be evaluated and differentiated in its second argument.
 *
 * The compression optimizer only talks to this interface; the matrix methods
 * have generic per-entry defaults that concrete kernels may vectorize.
 */
class Kernel {
  public:
    virtual ~Kernel() = default;

    [[nodiscard]] virtual double value(ConstRow x, ConstRow z) const = 0;
    /// d K(x, z) / dz
    [[nodiscard]] virtual Eigen::RowVectorXd grad_z(ConstRow x, ConstRow z) const = 0;

    /// Entry (i, j) = K(X_i, Z_j).
    [[nodiscard]] virtual Matrix matrix(const Matrix &x, const Matrix &z) const;
    /// Row k = sum_i weights(i, k) * dK(X_i, Z_k)/dZ_k, given gram = matrix(x, z).
    [[nodiscard]] virtual Matrix weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix &gram,
                                                 const Matrix &weights) const;
    /// Same with weights = u v^T, without forming the weight matrix.
    [[nodiscard]] virtual Matrix outer_weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix &gram, const Vector &u,
                                                       const Vector &v) const;
};

class RbfKernel final : public Kernel {
  public:
    explicit RbfKernel(KernelParams params);

    [[nodiscard]] const KernelParams &params() const noexcept { return params_; }
    [[nodiscard]] double value(ConstRow x, ConstRow z) const override;
    [[nodiscard]] Eigen::RowVectorXd grad_z(ConstRow x, ConstRow z) const override;
    [[nodiscard]] Matrix matrix(const Matrix &x, const Matrix &z) const override;
    [[nodiscard]] Matrix outer_weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix &gram, const Vector &u,
                                               const Vector &v) const override;
    [[nodiscard]] Matrix weighted_grad_z(const Matrix &x, const Matrix &z, const Matrix &gram,
                                         const Matrix &weights) const override;

  private:
    KernelParams params_;
};

double rbf(ConstRow x, ConstRow z, const KernelParams &p);
Eigen::RowVectorXd rbf_grad_z(ConstRow x, ConstRow z, const KernelParams &p);
/// Rows are computed in parallel; the result does not depend on the thread count.
Matrix kernel_matrix(const Matrix &x, const Matrix &z, const KernelParams &p);
/// K(x, z) * w without materializing the full |x| x |z| matrix.
Vector kernel_matvec(const Matrix &x, const Matrix &z, const Vector &w, const KernelParams &p);

}  // namespace cvm
