// SPDX-License-Identifier: Apache-2.0
#include "eval.hpp"

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"
#include "text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>
#include <sstream>

namespace cvm {

double accuracy(const MultiClassModel &m, const Dataset &ds) {
    if (ds.empty()) throw UsageError("accuracy of an empty dataset is undefined");
    const std::size_t d = std::max(m.dim(), ds.dim());
    const MultiClassModel mm = m.dim() < d ? m.with_dim(d) : m;
    const Dataset dd = ds.dim() < d ? ds.with_dim(d) : ds;
    const auto pred = predict_labels(mm, dd.features());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == dd.labels()[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double accuracy(const SvmModel &m, const Dataset &ds) { return accuracy(as_multiclass(m), ds); }

double evaluation_cost(const MultiClassModel &m, double per_kernel_cost) {
    return static_cast<double>(m.n_sv()) * per_kernel_cost;
}

double evaluation_cost(const SvmModel &m, double per_kernel_cost) { return static_cast<double>(m.n_sv()) * per_kernel_cost; }

double evaluation_cost(const MultiClassModel &m, const CostBudget &budget) { return evaluation_cost(m, budget.per_kernel_cost); }

std::vector<CurvePoint> build_curve(const MultiClassModel &source, const Dataset &train, const Dataset &test,
                                    const CurveConfig &cfg) {
    source.validate();
    cfg.gsv.validate();
    if (cfg.step < 1) throw UsageError("curve step must be at least 1");
    if (cfg.max_sv < cfg.step) throw UsageError(fmt::format("max_sv {} is below the step {}", cfg.max_sv, cfg.step));
    if (!(cfg.per_kernel_cost > 0.0)) throw UsageError("per-kernel cost must be positive");
    std::size_t largest = 0;
    for (const auto &p : source.pairs) largest = std::max(largest, p.n_sv());
    if (cfg.max_sv > largest)
        throw UsageError(fmt::format("max_sv {} exceeds the model's {} support vectors", cfg.max_sv, largest));

    Matrix anchors;
    const Matrix *anchor_ptr = nullptr;
    if (cfg.gsv.anchors == AnchorMode::training_points) {
        const Dataset t = train.dim() < source.dim() ? train.with_dim(source.dim()) : train;
        anchors = t.features();
        anchor_ptr = &anchors;
    }

    const std::size_t k = source.pairs.size();
    std::vector<SupportVectorPath> paths(k);
    for (std::size_t i = 0; i < k; ++i) {
        const SvmModel &src = source.pairs[i];
        paths[i] = support_vector_path(src, std::min(cfg.max_sv, src.n_sv()));
        if (paths[i].path.steps.empty()) throw NumericalError("LARS path is empty");
    }

    const double acc_full = accuracy(source, test);
    std::vector<std::size_t> budgets;
    for (std::size_t m = cfg.step; m <= cfg.max_sv; m += cfg.step) budgets.push_back(m);

    std::vector<CurvePoint> curve(budgets.size());
    parallel_for(budgets.size(), [&](std::size_t b) {
        MultiClassModel lars{source.classes, {}};
        MultiClassModel cvm{source.classes, {}};
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t mi = std::min(budgets[b], paths[i].path.steps.size());
            LarsSvm l = paths[i].model_at(source.pairs[i], mi);
            GsvResult g = optimize(l.model, source.pairs[i], cfg.gsv, anchor_ptr);
            lars.pairs.push_back(std::move(l.model));
            cvm.pairs.push_back(to_model(g.model));
        }
        CurvePoint &pt = curve[b];
        pt.n_sv = cvm.n_sv();
        pt.cost = evaluation_cost(cvm, cfg.per_kernel_cost);
        pt.acc_lars = accuracy(lars, test);
        pt.acc_cvm = accuracy(cvm, test);
        pt.acc_full = acc_full;
        log().info("curve: n_sv {} lars {:.4f} cvm {:.4f} full {:.4f}", pt.n_sv, pt.acc_lars, pt.acc_cvm, acc_full);
    });
    return curve;
}

void write_curve_csv(std::ostream &out, std::span<const CurvePoint> curve) {
    out << "n_sv,cost,acc_lars,acc_cvm,acc_full\n";
    for (const auto &p : curve) {
        out << p.n_sv << ',' << detail::format_double(p.cost) << ',' << detail::format_double(p.acc_lars) << ','
            << detail::format_double(p.acc_cvm) << ',' << detail::format_double(p.acc_full) << '\n';
    }
}

std::string curve_to_csv(std::span<const CurvePoint> curve) {
    std::ostringstream os;
    write_curve_csv(os, curve);
    return os.str();
}

}  // namespace cvm
