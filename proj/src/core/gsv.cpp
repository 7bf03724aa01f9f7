// SPDX-License-Identifier: Apache-2.0
#include "gsv.hpp"

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"

#include <fmt/format.h>

#include <bit>
#include <cmath>
#include <limits>

namespace cvm {

void CompressedModel::validate() const { to_model(*this).validate(); }

SvmModel to_model(const CompressedModel &cm) {
    SvmModel m;
    m.support_vectors = cm.support_vectors;
    m.coef = cm.coef;
    m.bias = cm.bias;
    m.kernel = cm.kernel;
    m.class_pair = cm.class_pair;
    return m;
}

std::uint64_t model_digest(const SvmModel &m) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    auto mix_double = [&](double v) { mix(std::bit_cast<std::uint64_t>(v)); };
    mix(static_cast<std::uint64_t>(m.support_vectors.rows()));
    mix(static_cast<std::uint64_t>(m.support_vectors.cols()));
    for (Eigen::Index i = 0; i < m.support_vectors.size(); ++i) mix_double(m.support_vectors.data()[i]);
    for (Eigen::Index i = 0; i < m.coef.size(); ++i) mix_double(m.coef[i]);
    mix_double(m.bias);
    mix_double(m.kernel.sigma);
    return h;
}

void GsvConfig::validate() const {
    if (max_iters < 0) throw UsageError("max_iters must be nonnegative");
    if (!(loss_rel_tol >= 0.0)) throw UsageError("loss_rel_tol must be nonnegative");
    if (!(grad_tol >= 0.0)) throw UsageError("grad_tol must be nonnegative");
    if (cg_restart_period < 0) throw UsageError("cg_restart_period must be nonnegative");
    if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) throw UsageError("Armijo constant must lie in (0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw UsageError("backtrack factor must lie in (0, 1)");
    if (max_backtracks < 1) throw UsageError("max_backtracks must be positive");
}

namespace {

void check_shapes(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target) {
    if (svs.rows() != alpha.size())
        throw UsageError(fmt::format("{} support vectors but {} coefficients", svs.rows(), alpha.size()));
    if (anchors.rows() != target.size())
        throw UsageError(fmt::format("{} anchors but {} targets", anchors.rows(), target.size()));
    if (svs.cols() != anchors.cols())
        throw UsageError(fmt::format("support vectors have {} features, anchors {}", svs.cols(), anchors.cols()));
}

struct Evaluation {
    double loss = 0.0;
    Matrix gram;  // K(anchors, svs)
    Vector residual;
};

Evaluation evaluate(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const Kernel &k) {
    Evaluation e;
    e.gram = k.matrix(anchors, svs);
    e.residual = e.gram * alpha - target;
    e.loss = e.residual.squaredNorm();
    return e;
}

CvmGradient gradient(const Evaluation &e, const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Kernel &k) {
    CvmGradient g;
    g.alpha = 2.0 * (e.gram.transpose() * e.residual);
    g.svs = k.outer_weighted_grad_z(anchors, svs, e.gram, 2.0 * e.residual, alpha);
    return g;
}

double rms(const Eigen::Ref<const Eigen::ArrayXd> &v) {
    return v.size() == 0 ? 0.0 : std::sqrt(v.square().mean());
}

}  // namespace

double cvm_loss(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const Kernel &k) {
    check_shapes(svs, alpha, anchors, target);
    return evaluate(svs, alpha, anchors, target, k).loss;
}

double cvm_loss(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const KernelParams &p) {
    return cvm_loss(svs, alpha, anchors, target, RbfKernel(p));
}

CvmGradient cvm_grad(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const Kernel &k) {
    check_shapes(svs, alpha, anchors, target);
    return gradient(evaluate(svs, alpha, anchors, target, k), svs, alpha, anchors, k);
}

CvmGradient cvm_grad(const Matrix &svs, const Vector &alpha, const Matrix &anchors, const Vector &target, const KernelParams &p) {
    return cvm_grad(svs, alpha, anchors, target, RbfKernel(p));
}

namespace {

// Flat optimizer variable: support vector coordinates (row-major) divided by
// x_scale, then coefficients divided by a_scale.
struct Packing {
    Eigen::Index m = 0;
    Eigen::Index d = 0;
    double x_scale = 1.0;
    double a_scale = 1.0;

    [[nodiscard]] Eigen::Index size() const { return m * d + m; }

    [[nodiscard]] Eigen::VectorXd pack(const Matrix &svs, const Vector &alpha) const {
        Eigen::VectorXd z(size());
        z.head(m * d) = Eigen::Map<const Eigen::VectorXd>(svs.data(), m * d) / x_scale;
        z.tail(m) = alpha / a_scale;
        return z;
    }
    void unpack(const Eigen::VectorXd &z, Matrix &svs, Vector &alpha) const {
        svs = Eigen::Map<const Matrix>(z.data(), m, d) * x_scale;
        alpha = z.tail(m) * a_scale;
    }
    [[nodiscard]] Eigen::VectorXd pack_gradient(const CvmGradient &g) const {
        Eigen::VectorXd out(size());
        out.head(m * d) = Eigen::Map<const Eigen::VectorXd>(g.svs.data(), m * d) * x_scale;
        out.tail(m) = g.alpha * a_scale;
        return out;
    }
};

}  // namespace

GsvResult optimize(const SvmModel &init, const SvmModel &source, const GsvConfig &cfg, const Matrix *anchor_points) {
    cfg.validate();
    init.validate();
    source.validate();
    if (init.kernel.gamma() != source.kernel.gamma()) throw UsageError("initial and source models use different kernels");
    if (init.dim() != source.dim()) throw UsageError("initial and source models differ in dimension");

    const Matrix *anchors = &source.support_vectors;
    if (cfg.anchors == AnchorMode::training_points) {
        if (anchor_points == nullptr) throw UsageError("training-point anchors requested but none supplied");
        if (static_cast<std::size_t>(anchor_points->cols()) != source.dim())
            throw UsageError("anchor points differ in dimension from the model");
        anchors = anchor_points;
    }
    const RbfKernel kernel(source.kernel);
    const Vector target = kernel_matvec(*anchors, source.support_vectors, source.coef, source.kernel);

    Packing pk;
    pk.m = init.support_vectors.rows();
    pk.d = init.support_vectors.cols();
    if (cfg.precondition) {
        // Centered, so that translating the data does not change the scaling.
        const Matrix centered = init.support_vectors.rowwise() - init.support_vectors.colwise().mean();
        const double xs = rms(Eigen::Map<const Eigen::ArrayXd>(centered.data(), centered.size()));
        pk.x_scale = xs > 0.0 ? xs : source.kernel.sigma;
        const double as = rms(init.coef.array());
        pk.a_scale = as > 0.0 ? as : 1.0;
    }

    GsvResult res;
    res.model.bias = source.bias;
    res.model.kernel = source.kernel;
    res.model.class_pair = source.class_pair;
    res.model.source_digest = model_digest(source);

    Matrix svs = init.support_vectors;
    Vector alpha = init.coef;
    Evaluation ev = evaluate(svs, alpha, *anchors, target, kernel);
    if (!std::isfinite(ev.loss)) throw NumericalError("non-finite loss at the initial point");
    res.loss_history.push_back(ev.loss);
    const double grad_threshold = cfg.grad_tol * (1.0 + ev.loss);

    Eigen::VectorXd z = pk.pack(svs, alpha);
    Eigen::VectorXd g = pk.pack_gradient(gradient(ev, svs, alpha, *anchors, kernel));
    if (!g.allFinite()) throw NumericalError("non-finite gradient at iteration 0");
    const int restart_period = cfg.cg_restart_period > 0 ? cfg.cg_restart_period : static_cast<int>(10 * pk.size());

    Eigen::VectorXd dir = -g;
    double prev_step = 0.0;
    double prev_slope = 0.0;
    int since_restart = 0;
    int it = 0;
    res.stop_reason = "max_iters";

    auto loss_at = [&](const Eigen::VectorXd &zt, Matrix &s, Vector &a) {
        pk.unpack(zt, s, a);
        return evaluate(s, a, *anchors, target, kernel);
    };

    for (; it < cfg.max_iters; ++it) {
        const double gnorm = g.norm();
        if (gnorm <= grad_threshold || gnorm == 0.0) {
            res.stop_reason = "grad_tol";
            break;
        }
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            dir = -g;
            slope = -g.squaredNorm();
            since_restart = 0;
        }

        // Initial trial: reuse the previous step's predicted decrease, or a
        // unit move in scaled coordinates on the first iteration.
        double step = prev_step > 0.0 ? prev_step * prev_slope / slope : 1.0 / dir.norm();
        if (!(step > 0.0) || !std::isfinite(step)) step = 1.0 / dir.norm();

        const double f0 = ev.loss;
        Matrix s_trial;
        Vector a_trial;
        Evaluation best;
        double best_step = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
            Evaluation trial = loss_at(z + step * dir, s_trial, a_trial);
            const bool armijo = std::isfinite(trial.loss) && trial.loss <= f0 + cfg.armijo_c1 * step * slope;
            if (armijo) {
                best = std::move(trial);
                best_step = step;
                accepted = true;
                // One quadratic-interpolation refinement along the same line.
                const double curv = best.loss - f0 - slope * step;
                if (curv > 0.0) {
                    const double q = -slope * step * step / (2.0 * curv);
                    if (q > 0.0 && q != step && q < 20.0 * step) {
                        Evaluation refined = loss_at(z + q * dir, s_trial, a_trial);
                        if (std::isfinite(refined.loss) && refined.loss < best.loss &&
                            refined.loss <= f0 + cfg.armijo_c1 * q * slope) {
                            best = std::move(refined);
                            best_step = q;
                        }
                    }
                }
                break;
            }
            // Quadratic backtracking, kept within [0.1, backtrack] of the step.
            double next = cfg.backtrack * step;
            if (std::isfinite(trial.loss)) {
                const double curv = trial.loss - f0 - slope * step;
                if (curv > 0.0) next = std::clamp(-slope * step * step / (2.0 * curv), 0.1 * step, cfg.backtrack * step);
            }
            step = next;
        }
        if (!accepted) {
            res.line_search_failed = true;
            res.stop_reason = "line_search";
            log().info("gsv: line search failed at iteration {}", it);
            break;
        }

        z += best_step * dir;
        pk.unpack(z, svs, alpha);
        ev = std::move(best);
        res.loss_history.push_back(ev.loss);
        Eigen::VectorXd g_new = pk.pack_gradient(gradient(ev, svs, alpha, *anchors, kernel));
        if (!g_new.allFinite()) throw NumericalError(fmt::format("non-finite gradient at iteration {}", it + 1));

        prev_step = best_step;
        prev_slope = slope;
        const double decrease = f0 - ev.loss;
        // Polak-Ribiere+, restarted periodically.
        double beta = std::max(0.0, g_new.dot(g_new - g) / g.squaredNorm());
        if (++since_restart >= restart_period) {
            beta = 0.0;
            since_restart = 0;
        }
        dir = -g_new + beta * dir;
        g = std::move(g_new);

        if (decrease <= cfg.loss_rel_tol * f0) {
            ++it;
            res.stop_reason = "loss_rel_tol";
            break;
        }
    }

    res.model.support_vectors = std::move(svs);
    res.model.coef = std::move(alpha);
    res.model.iterations = it;
    log().debug("gsv: {} iterations, loss {:.6g} -> {:.6g} ({})", it, res.loss_history.front(), res.loss_history.back(),
                res.stop_reason);
    return res;
}

Compression compress(const SvmModel &source, std::size_t m, const GsvConfig &cfg, const Matrix *anchor_points) {
    cfg.validate();
    Compression out;
    out.lars = select_support_vectors(source, CostBudget::from_count(m));
    out.gsv = optimize(out.lars.model, source, cfg, anchor_points);
    return out;
}

MultiCompression compress(const MultiClassModel &source, std::size_t m, const GsvConfig &cfg, bool lars_only,
                          const Matrix *anchor_points) {
    source.validate();
    cfg.validate();
    if (m == 0) throw UsageError("budget must be at least one support vector");
    const std::size_t k = source.pairs.size();
    std::vector<SvmModel> lars(k);
    std::vector<SvmModel> cvm(k);
    std::vector<GsvResult> gsv(k);
    parallel_for(k, [&](std::size_t i) {
        const SvmModel &src = source.pairs[i];
        const std::size_t mi = std::min(m, src.n_sv());
        LarsSvm l = select_support_vectors(src, CostBudget::from_count(mi));
        if (lars_only) {
            cvm[i] = l.model;
        } else {
            gsv[i] = optimize(l.model, src, cfg, anchor_points);
            cvm[i] = to_model(gsv[i].model);
            cvm[i].c_param.reset();
        }
        lars[i] = std::move(l.model);
    });
    MultiCompression out;
    out.lars.classes = source.classes;
    out.lars.pairs = std::move(lars);
    out.cvm.classes = source.classes;
    out.cvm.pairs = std::move(cvm);
    if (!lars_only) out.gsv = std::move(gsv);
    return out;
}

}  // namespace cvm
