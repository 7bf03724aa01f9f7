// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "svm.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace cvm {

/// Evaluation-cost budget: a prediction costs n_sv * per_kernel_cost, so a
/// budget B allows floor(B / per_kernel_cost) support vectors.
struct CostBudget {
    double per_kernel_cost = 1.0;
    double budget = 1.0;

    static CostBudget from_count(std::size_t m, double per_kernel_cost = 1.0);
    /// floor(budget / per_kernel_cost); throws UsageError when that is below 1.
    [[nodiscard]] std::size_t max_support_vectors() const;
};

/**
 * Least-squares surrogate over the support vectors of a trained model.
 *
 * With K the kernel matrix over the support vectors, Y = diag(y) and the bias b
 * held fixed, the quadratic
 *
 *     |1 - Y K a - y b|^2 + a^T K a
 *
 * equals |omega a + beta|^2 up to a constant, where omega^T omega =
 * K^T Y^T Y K + K = S D S^T, omega = sqrt(D) S^T and
 * beta = -D^{-1/2} S^T K^T Y (1 - y b). Eigenvalues below the floor are raised
 * to it so that both D^{1/2} and D^{-1/2} stay finite.
 */
struct LarsProblem {
    Eigen::MatrixXd omega;
    Eigen::VectorXd beta;
    Eigen::MatrixXd eigvecs;  ///< S
    Eigen::VectorXd eigvals;  ///< D after flooring, nonincreasing
    double fixed_bias = 0.0;
    std::vector<std::size_t> sv_index_map;  ///< column j refers to source support vector sv_index_map[j]
};

/// Default floor relative to the largest eigenvalue.
inline constexpr double default_eig_floor = 1e-10;

/// ±1 label per support vector, read off the coefficient signs (y_i a_i >= 0
/// holds for squared-hinge and LibSVM solutions alike).
Eigen::VectorXd support_vector_labels(const SvmModel &model);

/// sv_labels must hold ±1 per support vector. eig_floor is relative to max(D).
/// Throws NumericalError if the matrix has an eigenvalue below -1e-6 * trace.
LarsProblem build_surrogate(const SvmModel &model, const Eigen::VectorXd &sv_labels, double eig_floor = default_eig_floor);
LarsProblem build_surrogate(const SvmModel &model, double eig_floor = default_eig_floor);

/// The same regression in Gram form: gram = K^2 + K and corr0 = K (y - b),
/// i.e. omega^T omega and -omega^T beta without the eigenvalue floor. Needs no
/// eigendecomposition, which dominates the cost for thousands of support vectors.
struct LarsGram {
    Eigen::MatrixXd gram;
    Eigen::VectorXd corr0;
    double fixed_bias = 0.0;
    std::vector<std::size_t> sv_index_map;
};

LarsGram build_gram_surrogate(const SvmModel &model, const Eigen::VectorXd &sv_labels);
LarsGram build_gram_surrogate(const SvmModel &model);

/// Above this many support vectors the Gram form is used by
/// select_support_vectors and support_vector_path.
inline constexpr std::size_t gram_form_threshold = 2000;

struct LarsStep {
    std::size_t activated = 0;  ///< coordinate that entered the active set at this step
    Eigen::VectorXd coef;       ///< full coefficient vector after the step
};

struct LarsPath {
    std::vector<LarsStep> steps;
    std::size_t budget = 0;
    bool truncated = false;  ///< stopped before `budget` steps (rank deficiency)

    /// Activated coordinates of the first m steps, in activation order.
    [[nodiscard]] std::vector<std::size_t> active_set(std::size_t m) const;
};

/**
 * Least angle regression on min |omega a + beta|^2, one activation per step.
 *
 * The first coordinate is the one with the largest absolute correlation
 * omega^T(-beta); afterwards the coefficients move along the equiangular
 * direction of the active set until an inactive correlation ties the active
 * ones. Coefficients may take either sign and never leave the active set.
 * Ties break toward the lowest index.
 */
LarsPath lars_select(const LarsProblem &p, std::size_t m);
LarsPath lars_select(const LarsGram &g, std::size_t m);

struct LarsSvm {
    SvmModel model;  ///< the m selected support vectors with their step-m coefficients
    LarsPath path;
    std::vector<std::size_t> selected;  ///< indices into the source support vectors
};

/// LARS-SVM model at step m (m <= path length) of a computed path.
LarsSvm lars_model(const SvmModel &source, const LarsProblem &p, const LarsPath &path, std::size_t m);
LarsSvm lars_model(const SvmModel &source, const LarsGram &g, const LarsPath &path, std::size_t m);

/// LARS path over a model's support vectors up to `max_steps`, in eigen form
/// up to gram_form_threshold support vectors and in Gram form above.
struct SupportVectorPath {
    LarsPath path;
    double fixed_bias = 0.0;
    std::vector<std::size_t> sv_index_map;

    [[nodiscard]] LarsSvm model_at(const SvmModel &source, std::size_t m) const;
};

SupportVectorPath support_vector_path(const SvmModel &source, std::size_t max_steps, double eig_floor = default_eig_floor);

/// Surrogate + LARS + model extraction at the budget's support-vector count.
LarsSvm select_support_vectors(const SvmModel &source, const CostBudget &budget, double eig_floor = default_eig_floor);

}  // namespace cvm
