// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "data.hpp"
#include "kernel.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cvm {

/**
 * Binary kernel expansion f(x) = sum_i coef_i K(sv_i, x) + bias.
 *
 * coef carries the sign: a positive score votes for class_pair.second, a
 * negative one for class_pair.first. Compressed models use the same type, so
 * anything that predicts with an SvmModel also predicts with them.
 */
struct SvmModel {
    Matrix support_vectors;  ///< one row per support vector
    Vector coef;
    double bias = 0.0;
    KernelParams kernel;
    std::optional<double> c_param;       ///< unknown for imported models
    std::pair<int, int> class_pair{-1, +1};  ///< (negative label, positive label)

    [[nodiscard]] std::size_t n_sv() const noexcept { return static_cast<std::size_t>(coef.size()); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(support_vectors.cols()); }
    /// Throws DataError if the invariants do not hold (>= 1 SV, sizes agree,
    /// coefficients finite and nonzero, positive bandwidth).
    void validate() const;
    /// Zero-pads support vectors to a larger feature dimension.
    [[nodiscard]] SvmModel with_dim(std::size_t dim) const;
};

double predict_score(const SvmModel &m, ConstRow x);
Vector predict_scores(const SvmModel &m, const Matrix &x);
int predict_label(const SvmModel &m, ConstRow x);

/// One-vs-one ensemble. pairs[k].class_pair names the two classes of sub-model k.
struct MultiClassModel {
    std::vector<int> classes;  ///< sorted
    std::vector<SvmModel> pairs;

    /// Also checks that every unordered class pair appears exactly once.
    void validate() const;
    [[nodiscard]] std::size_t n_sv() const noexcept;
    [[nodiscard]] std::size_t dim() const noexcept;
    [[nodiscard]] MultiClassModel with_dim(std::size_t dim) const;
};

/// Wraps a binary model as a one-pair ensemble.
MultiClassModel as_multiclass(SvmModel m);

/// Majority vote over the pairs; ties go to the smallest label.
int predict_label(const MultiClassModel &m, ConstRow x);
std::vector<int> predict_labels(const MultiClassModel &m, const Matrix &x);

struct TrainConfig {
    double c_param = 1.0;
    KernelParams kernel;
    int max_newton_iters = 100;
    /// Converged once |gradient| <= grad_tol * max(1, |gradient at start|).
    double grad_tol = 1e-10;
    /// Coefficients with |a_i| <= alpha_prune_tol * max|a| are dropped.
    double alpha_prune_tol = 1e-8;

    void validate() const;
};

struct TrainReport {
    int iterations = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    std::vector<double> objective_history;  ///< value before the first step, then after each step
};

/**
 * Squared-hinge kernel SVM on a two-class dataset.
 *
 * Minimizes C * sum_i max(1 - y_i (K a + b)_i, 0)^2 + a^T K a over (a, b) with
 * damped Newton steps on the active (margin-violating) set and an exact line
 * search. The larger label is the positive class. Returns the pruned
 * expansion with coef = a.
 */
SvmModel train(const Dataset &ds, const TrainConfig &cfg, TrainReport *report = nullptr);

/// One binary model per unordered class pair, trained on that pair's samples.
MultiClassModel train_one_vs_one(const Dataset &ds, const TrainConfig &cfg);

/// train() for two classes, train_one_vs_one() otherwise, as an ensemble.
MultiClassModel train_any(const Dataset &ds, const TrainConfig &cfg);

/// Squared-hinge objective of an expansion evaluated on ds (labels mapped per class_pair).
double squared_hinge_objective(const SvmModel &m, const Dataset &ds, double c_param);

struct GridCell {
    double c_param = 0.0;
    double sigma = 0.0;
    std::optional<double> accuracy;  ///< empty when training failed
    std::string error;
};

struct GridResult {
    double best_c = 0.0;
    double best_sigma = 0.0;
    double best_accuracy = 0.0;
    std::vector<GridCell> table;  ///< row-major over (c, sigma)
};

/// Validation-split grid search; ties prefer smaller C, then smaller sigma.
GridResult grid_search(const Dataset &ds, std::span<const double> c_grid, std::span<const double> sigma_grid,
                       const SplitSpec &spec, const TrainConfig &base);

}  // namespace cvm
