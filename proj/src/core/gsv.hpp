// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "compress.hpp"
#include "svm.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cvm {

/// Compressed expansion with artificial support vectors. Predicts like an
/// SvmModel via to_model().
struct CompressedModel {
    Matrix support_vectors;
    Vector coef;
    double bias = 0.0;
    KernelParams kernel;
    std::pair<int, int> class_pair{-1, +1};
    std::uint64_t source_digest = 0;
    int iterations = 0;

    [[nodiscard]] std::size_t n_sv() const noexcept { return static_cast<std::size_t>(coef.size()); }
    void validate() const;
};

SvmModel to_model(const CompressedModel &cm);
/// FNV-1a over the model's numbers; identifies the source of a compression.
std::uint64_t model_digest(const SvmModel &m);

enum class AnchorMode {
    support_vectors,  ///< match predictions on the source model's support vectors
    training_points,  ///< match predictions on caller-supplied points
};

struct GsvConfig {
    int max_iters = 2560;
    double loss_rel_tol = 1e-10;
    /// Stop once |gradient| <= grad_tol * (1 + initial loss).
    double grad_tol = 1e-8;
    /// 0 means ten times the number of variables.
    int cg_restart_period = 0;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_backtracks = 60;
    bool precondition = true;
    AnchorMode anchors = AnchorMode::support_vectors;

    void validate() const;
};

/// |K(anchors, svs) alpha - target|^2
double cvm_loss(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const Kernel &k);
double cvm_loss(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const KernelParams &p);

struct CvmGradient {
    Matrix svs;    ///< d L / d sv_k, one row per support vector
    Vector alpha;  ///< d L / d alpha
};

CvmGradient cvm_grad(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const Kernel &k);
CvmGradient cvm_grad(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const KernelParams &p);

struct GsvResult {
    CompressedModel model;
    std::vector<double> loss_history;  ///< initial loss, then one entry per accepted step
    bool line_search_failed = false;
    std::string stop_reason;
};

/**
 * Joint nonlinear conjugate gradient (Polak-Ribiere+) over the support vector
 * coordinates and coefficients of `init`, minimizing cvm_loss against the
 * source model's scores on the anchors. With AnchorMode::training_points the
 * anchors are taken from `anchor_points`.
 */
GsvResult optimize(const SvmModel &init, const SvmModel &source, const GsvConfig &cfg,
                   const Matrix *anchor_points = nullptr);

/// LARS-SVM at the budget followed by optimize().
struct Compression {
    LarsSvm lars;
    GsvResult gsv;
};
Compression compress(const SvmModel &source, std::size_t m, const GsvConfig &cfg, const Matrix *anchor_points = nullptr);

struct MultiCompression {
    MultiClassModel lars;
    MultiClassModel cvm;
    std::vector<GsvResult> gsv;  ///< per pair
};

/// Per pair, with the budget clamped to each pair's support-vector count.
/// lars_only skips the optimizer (cvm then equals lars).
MultiCompression compress(const MultiClassModel &source, std::size_t m, const GsvConfig &cfg, bool lars_only = false,
                          const Matrix *anchor_points = nullptr);

}  // namespace cvm
