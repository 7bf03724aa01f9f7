// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "compress.hpp"
#include "gsv.hpp"
#include "svm.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cvm {

/// Fraction of samples whose predicted label equals the true one. Model and
/// data are zero-padded to a common dimension. Throws UsageError on an empty set.
double accuracy(const MultiClassModel &m, const Dataset &ds);
double accuracy(const SvmModel &m, const Dataset &ds);

/// n_sv * e, summed over the pairs of an ensemble.
double evaluation_cost(const MultiClassModel &m, double per_kernel_cost = 1.0);
double evaluation_cost(const SvmModel &m, double per_kernel_cost = 1.0);
double evaluation_cost(const MultiClassModel &m, const CostBudget &budget);

struct CurvePoint {
    std::size_t n_sv = 0;  ///< support vectors of the compressed model, over all pairs
    double cost = 0.0;
    double acc_lars = 0.0;
    double acc_cvm = 0.0;
    double acc_full = 0.0;
};

struct CurveConfig {
    std::size_t step = 10;
    std::size_t max_sv = 100;
    double per_kernel_cost = 1.0;
    GsvConfig gsv;
};

/**
 * LARS-SVM and CVM accuracy on `test` for budgets step, 2 step, ..., max_sv.
 * Each pair's LARS path is computed once and cut at every budget; pairs with
 * fewer support vectors than a budget keep all of them. `train` supplies the
 * anchors when cfg.gsv.anchors is AnchorMode::training_points.
 */
std::vector<CurvePoint> build_curve(const MultiClassModel &source, const Dataset &train, const Dataset &test,
                                    const CurveConfig &cfg);

/// Header "n_sv,cost,acc_lars,acc_cvm,acc_full", then one row per point.
void write_curve_csv(std::ostream &out, std::span<const CurvePoint> curve);
std::string curve_to_csv(std::span<const CurvePoint> curve);

}  // namespace cvm
