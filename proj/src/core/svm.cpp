// SPDX-License-Identifier: Apache-2.0
#include "svm.hpp"

#include "error.hpp"
#include "log.hpp"
#include "parallel.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace cvm {

void SvmModel::validate() const {
    if (coef.size() < 1) throw DataError("model has no support vectors");
    if (support_vectors.rows() != coef.size()) {
        throw DataError(fmt::format("model has {} support vectors but {} coefficients", support_vectors.rows(), coef.size()));
    }
    if (!coef.allFinite() || !support_vectors.allFinite() || !std::isfinite(bias)) throw DataError("model contains non-finite values");
    for (Eigen::Index i = 0; i < coef.size(); ++i) {
        if (coef(i) == 0.0) throw DataError(fmt::format("support vector {} has a zero coefficient", i));
    }
    kernel.validate();
}

SvmModel SvmModel::with_dim(std::size_t d) const {
    if (d < dim()) throw UsageError(fmt::format("cannot shrink model dimension from {} to {}", dim(), d));
    SvmModel out = *this;
    if (d > dim()) {
        out.support_vectors = Matrix::Zero(support_vectors.rows(), static_cast<Eigen::Index>(d));
        out.support_vectors.leftCols(support_vectors.cols()) = support_vectors;
    }
    return out;
}

double predict_score(const SvmModel &m, ConstRow x) {
    if (static_cast<std::size_t>(x.size()) != m.dim()) {
        throw UsageError(fmt::format("input has {} features, model expects {}", x.size(), m.dim()));
    }
    const Matrix row = x;
    return (kernel_matrix(row, m.support_vectors, m.kernel) * m.coef)(0) + m.bias;
}

Vector predict_scores(const SvmModel &m, const Matrix &x) {
    if (static_cast<std::size_t>(x.cols()) != m.dim()) {
        throw UsageError(fmt::format("input has {} features, model expects {}", x.cols(), m.dim()));
    }
    Vector s = kernel_matvec(x, m.support_vectors, m.coef, m.kernel);
    s.array() += m.bias;
    return s;
}

int predict_label(const SvmModel &m, ConstRow x) {
    return predict_score(m, x) > 0.0 ? m.class_pair.second : m.class_pair.first;
}

void MultiClassModel::validate() const {
    if (classes.size() < 2) throw DataError("multi-class model needs at least two classes");
    if (!std::is_sorted(classes.begin(), classes.end()) ||
        std::adjacent_find(classes.begin(), classes.end()) != classes.end()) {
        throw DataError("multi-class model classes must be sorted and distinct");
    }
    std::set<std::pair<int, int>> seen;
    for (const auto &p : pairs) {
        p.validate();
        auto [a, b] = p.class_pair;
        if (!std::binary_search(classes.begin(), classes.end(), a) || !std::binary_search(classes.begin(), classes.end(), b) || a == b) {
            throw DataError(fmt::format("pair ({}, {}) does not name two model classes", a, b));
        }
        if (!seen.insert(std::minmax(a, b)).second) throw DataError(fmt::format("pair ({}, {}) appears twice", a, b));
    }
    const std::size_t k = classes.size();
    if (seen.size() != k * (k - 1) / 2) {
        throw DataError(fmt::format("model covers {} of {} class pairs", seen.size(), k * (k - 1) / 2));
    }
    const auto d = pairs.front().dim();
    for (const auto &p : pairs) {
        if (p.dim() != d) throw DataError("pair models disagree on feature dimension");
    }
}

std::size_t MultiClassModel::n_sv() const noexcept {
    std::size_t n = 0;
    for (const auto &p : pairs) n += p.n_sv();
    return n;
}

std::size_t MultiClassModel::dim() const noexcept {
    std::size_t d = 0;
    for (const auto &p : pairs) d = std::max(d, p.dim());
    return d;
}

MultiClassModel MultiClassModel::with_dim(std::size_t d) const {
    MultiClassModel out = *this;
    for (auto &p : out.pairs) p = p.with_dim(d);
    return out;
}

MultiClassModel as_multiclass(SvmModel m) {
    MultiClassModel out;
    out.classes = {std::min(m.class_pair.first, m.class_pair.second), std::max(m.class_pair.first, m.class_pair.second)};
    out.pairs.push_back(std::move(m));
    return out;
}

namespace {

int vote(const std::vector<int> &classes, const std::vector<int> &winners) {
    std::map<int, int> counts;
    for (int c : classes) counts[c] = 0;
    for (int w : winners) ++counts[w];
    int best = classes.front();
    for (int c : classes) {
        if (counts[c] > counts[best]) best = c;  // strict: ties keep the smaller label
    }
    return best;
}

}  // namespace

int predict_label(const MultiClassModel &m, ConstRow x) {
    std::vector<int> winners;
    winners.reserve(m.pairs.size());
    for (const auto &p : m.pairs) winners.push_back(predict_label(p, x));
    return vote(m.classes, winners);
}

std::vector<int> predict_labels(const MultiClassModel &m, const Matrix &x) {
    std::vector<Vector> scores;
    scores.reserve(m.pairs.size());
    for (const auto &p : m.pairs) scores.push_back(predict_scores(p, x));
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    std::vector<int> winners(m.pairs.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < m.pairs.size(); ++k) {
            winners[k] = scores[k](i) > 0.0 ? m.pairs[k].class_pair.second : m.pairs[k].class_pair.first;
        }
        out[static_cast<std::size_t>(i)] = vote(m.classes, winners);
    }
    return out;
}

void TrainConfig::validate() const {
    if (!(c_param > 0.0) || !std::isfinite(c_param)) throw UsageError(fmt::format("C must be positive, got {}", c_param));
    kernel.validate();
    if (max_newton_iters < 1) throw UsageError("max_newton_iters must be positive");
    if (!(grad_tol > 0.0)) throw UsageError("grad_tol must be positive");
    if (!(alpha_prune_tol >= 0.0)) throw UsageError("alpha_prune_tol must be nonnegative");
}

namespace {

// Problems above this size start from the solution on a strided subsample,
// which keeps the first Newton system small.
constexpr std::size_t warm_start_threshold = 3000;

std::vector<std::size_t> indices_where(const Vector &v, auto pred) {
    std::vector<std::size_t> idx;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (pred(v(i))) idx.push_back(static_cast<std::size_t>(i));
    }
    return idx;
}

Matrix rows_of(const Matrix &x, const std::vector<std::size_t> &idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(idx[k]));
    return out;
}

Vector entries_of(const Vector &v, const std::vector<std::size_t> &idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) out(static_cast<Eigen::Index>(k)) = v(static_cast<Eigen::Index>(idx[k]));
    return out;
}

/// K(x, x_S) a_S for the nonzero entries S of a.
Vector sparse_kernel_product(const Matrix &x, const Vector &a, const KernelParams &p) {
    auto support = indices_where(a, [](double v) { return v != 0.0; });
    if (support.empty()) return Vector::Zero(x.rows());
    return kernel_matvec(x, rows_of(x, support), entries_of(a, support), p);
}

struct Problem {
    const Matrix &x;
    const Vector &y;
    double c;
    KernelParams kernel;
};

/// C sum max(0, 1 - y o)^2 + a^T K a, using K a = o - b.
double objective(const Problem &pr, const Vector &a, double b, const Vector &o) {
    const Vector xi = (1.0 - pr.y.array() * o.array()).max(0.0).matrix();
    return pr.c * xi.squaredNorm() + a.dot((o.array() - b).matrix());
}

/// Exact minimizer over t in [0, 1] of the convex piecewise-quadratic objective
/// along (a, b, o) + t (d, db, delta).
double line_search(const Problem &pr, double b, const Vector &o, const Vector &d, double db,
                   const Vector &delta) {
    const double q1 = d.dot((o.array() - b).matrix());
    const double q2 = d.dot((delta.array() - db).matrix());
    auto derivs = [&](double t) {
        double g = 2.0 * (q1 + t * q2);
        double h = 2.0 * q2;
        for (Eigen::Index i = 0; i < o.size(); ++i) {
            const double xi = 1.0 - pr.y(i) * (o(i) + t * delta(i));
            if (xi > 0.0) {
                g -= 2.0 * pr.c * pr.y(i) * delta(i) * xi;
                h += 2.0 * pr.c * delta(i) * delta(i);
            }
        }
        return std::pair{g, h};
    };
    const auto [g0, h0] = derivs(0.0);
    if (g0 >= 0.0) return 0.0;
    if (derivs(1.0).first <= 0.0) return 1.0;
    double lo = 0.0, hi = 1.0, t = 0.0;
    double g = g0, h = h0;
    for (int it = 0; it < 100; ++it) {
        double next = h > 0.0 ? t - g / h : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
        std::tie(g, h) = derivs(t);
        if (std::abs(g) <= 1e-14 * std::abs(g0)) break;
        (g < 0.0 ? lo : hi) = t;
        if (hi - lo <= 1e-15) break;
    }
    return t;
}

struct Solution {
    Vector a;
    double b = 0.0;
    TrainReport report;
};

Solution solve(const Problem &pr, const TrainConfig &cfg) {
    const auto n = pr.x.rows();
    Solution s;
    s.a = Vector::Zero(n);

    if (static_cast<std::size_t>(n) > warm_start_threshold) {
        std::vector<std::size_t> sub;
        const std::size_t k = warm_start_threshold / 2;
        for (std::size_t i = 0; i < k; ++i) sub.push_back(i * static_cast<std::size_t>(n) / k);
        const Matrix xs = rows_of(pr.x, sub);
        const Vector ys = entries_of(pr.y, sub);
        // Both classes are needed; fall back to a cold start otherwise.
        if ((ys.array() > 0).any() && (ys.array() < 0).any()) {
            const Solution warm = solve(Problem{xs, ys, pr.c, pr.kernel}, cfg);
            for (std::size_t i = 0; i < sub.size(); ++i) s.a(static_cast<Eigen::Index>(sub[i])) = warm.a(static_cast<Eigen::Index>(i));
            s.b = warm.b;
            log().debug("warm start from {} of {} samples", sub.size(), n);
        }
    }

    Vector o = sparse_kernel_product(pr.x, s.a, pr.kernel);
    o.array() += s.b;
    double f = objective(pr, s.a, s.b, o);
    s.report.objective_history.push_back(f);

    double g0 = -1.0;
    for (int it = 0;; ++it) {
        const Vector xi = (1.0 - pr.y.array() * o.array()).max(0.0).matrix();
        // dF/da = 2 K (a - C y xi), dF/db = -2 C sum y xi
        const Vector w = s.a - pr.c * pr.y.cwiseProduct(xi);
        const Vector ga = 2.0 * sparse_kernel_product(pr.x, w, pr.kernel);
        const double gb = -2.0 * pr.c * pr.y.dot(xi);
        const double gnorm = std::sqrt(ga.squaredNorm() + gb * gb);
        if (g0 < 0.0) g0 = gnorm;
        s.report.grad_norm = gnorm;
        s.report.iterations = it;
        s.report.objective = f;
        if (gnorm <= cfg.grad_tol * std::max(1.0, g0)) break;
        if (it >= cfg.max_newton_iters) {
            throw NumericalError(fmt::format("SVM training did not converge in {} Newton iterations (gradient norm {:.3e})",
                                             cfg.max_newton_iters, gnorm));
        }

        // Newton target on the current violating set A:
        //   [K_AA + I/C, 1; 1^T, 0] [a_A; b] = [y_A; 0],  a outside A = 0.
        const auto active = indices_where(xi, [](double v) { return v > 0.0; });
        Vector a_new = Vector::Zero(n);
        double b_new = s.b;
        Vector o_new = Vector::Constant(n, s.b);
        if (!active.empty()) {
            const Matrix xa = rows_of(pr.x, active);
            const Vector ya = entries_of(pr.y, active);
            const auto m = static_cast<Eigen::Index>(active.size());
            Matrix kaa = kernel_matrix(xa, xa, pr.kernel);
            Eigen::Map<Eigen::MatrixXd> sys(kaa.data(), m, m);  // symmetric, so layout is irrelevant
            sys.diagonal().array() += 1.0 / pr.c;
            Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(sys);
            if (llt.info() != Eigen::Success) throw NumericalError("Newton system is not positive definite");
            const Vector u = llt.solve(ya);
            const Vector v = llt.solve(Vector::Ones(m));
            b_new = u.sum() / v.sum();
            const Vector aa = u - b_new * v;
            for (std::size_t k = 0; k < active.size(); ++k) a_new(static_cast<Eigen::Index>(active[k])) = aa(static_cast<Eigen::Index>(k));
            o_new = kernel_matvec(pr.x, xa, aa, pr.kernel);
            o_new.array() += b_new;
        }

        const Vector d = a_new - s.a;
        const double db = b_new - s.b;
        const Vector delta = o_new - o;
        const double t = line_search(pr, s.b, o, d, db, delta);
        if (t == 1.0) {
            s.a = std::move(a_new);
            s.b = b_new;
            o = std::move(o_new);
        } else {
            s.a += t * d;
            s.b += t * db;
            o += t * delta;
        }
        const double f_new = objective(pr, s.a, s.b, o);
        log().debug("newton {}: |A| = {}, step {:.3g}, objective {:.12g}, |grad| {:.3e}", it, active.size(), t, f_new, gnorm);
        if (!std::isfinite(f_new)) throw NumericalError(fmt::format("non-finite objective at Newton iteration {}", it));
        if (t == 0.0) {
            // No descent possible along the Newton direction: at the optimum up to roundoff.
            s.report.objective_history.push_back(f);
            break;
        }
        f = std::min(f, f_new);
        s.report.objective_history.push_back(f_new);
    }
    return s;
}

}  // namespace

SvmModel train(const Dataset &ds, const TrainConfig &cfg, TrainReport *report) {
    cfg.validate();
    if (ds.classes().size() != 2) {
        throw UsageError(fmt::format("binary training needs exactly 2 classes, dataset has {}", ds.classes().size()));
    }
    if (ds.size() < 2) throw UsageError("binary training needs at least 2 samples");
    const int neg = ds.classes()[0];
    const int pos = ds.classes()[1];
    Vector y(static_cast<Eigen::Index>(ds.size()));
    for (std::size_t i = 0; i < ds.size(); ++i) y(static_cast<Eigen::Index>(i)) = ds.label(i) == pos ? 1.0 : -1.0;

    const Solution sol = solve(Problem{ds.features(), y, cfg.c_param, cfg.kernel}, cfg);

    const double amax = sol.a.cwiseAbs().maxCoeff();
    const double cut = cfg.alpha_prune_tol * amax;
    auto keep = indices_where(sol.a, [cut](double v) { return std::abs(v) > cut && v != 0.0; });
    if (keep.empty()) throw NumericalError("training produced no support vectors");

    SvmModel m;
    m.support_vectors = rows_of(ds.features(), keep);
    m.coef = entries_of(sol.a, keep);
    m.bias = sol.b;
    m.kernel = cfg.kernel;
    m.c_param = cfg.c_param;
    m.class_pair = {neg, pos};
    if (report) *report = sol.report;
    log().info("trained ({}, {}): {} support vectors of {} samples, objective {:.10g}, {} Newton iterations", neg, pos,
               m.n_sv(), ds.size(), sol.report.objective, sol.report.iterations);
    return m;
}

MultiClassModel train_one_vs_one(const Dataset &ds, const TrainConfig &cfg) {
    cfg.validate();
    const auto &classes = ds.classes();
    if (classes.size() < 2) throw UsageError("one-vs-one training needs at least 2 classes");
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        for (std::size_t j = i + 1; j < classes.size(); ++j) pairs.emplace_back(classes[i], classes[j]);
    }
    MultiClassModel out;
    out.classes = classes;
    out.pairs.resize(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        const int keep[] = {pairs[k].first, pairs[k].second};
        out.pairs[k] = train(ds.filter_classes(keep), cfg);
    });
    return out;
}

MultiClassModel train_any(const Dataset &ds, const TrainConfig &cfg) {
    if (ds.classes().size() == 2) return as_multiclass(train(ds, cfg));
    return train_one_vs_one(ds, cfg);
}

double squared_hinge_objective(const SvmModel &m, const Dataset &ds, double c_param) {
    const Vector scores = predict_scores(m, ds.features());
    double loss = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double y = ds.label(i) == m.class_pair.second ? 1.0 : -1.0;
        const double xi = std::max(0.0, 1.0 - y * scores(static_cast<Eigen::Index>(i)));
        loss += xi * xi;
    }
    const Matrix k = kernel_matrix(m.support_vectors, m.support_vectors, m.kernel);
    return c_param * loss + m.coef.dot(k * m.coef);
}

GridResult grid_search(const Dataset &ds, std::span<const double> c_grid, std::span<const double> sigma_grid,
                       const SplitSpec &spec, const TrainConfig &base) {
    if (c_grid.empty() || sigma_grid.empty()) throw UsageError("grid search needs nonempty C and sigma grids");
    const auto [train_part, val_part] = split(ds, spec);

    GridResult res;
    res.table.resize(c_grid.size() * sigma_grid.size());
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
        for (std::size_t j = 0; j < sigma_grid.size(); ++j) {
            res.table[i * sigma_grid.size() + j].c_param = c_grid[i];
            res.table[i * sigma_grid.size() + j].sigma = sigma_grid[j];
        }
    }
    parallel_for(res.table.size(), [&](std::size_t k) {
        GridCell &cell = res.table[k];
        TrainConfig cfg = base;
        cfg.c_param = cell.c_param;
        cfg.kernel = KernelParams{cell.sigma};
        try {
            const MultiClassModel m = train_any(train_part, cfg);
            const auto pred = predict_labels(m, val_part.features());
            std::size_t correct = 0;
            for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == val_part.label(i) ? 1 : 0;
            cell.accuracy = static_cast<double>(correct) / static_cast<double>(val_part.size());
        } catch (const Error &e) {
            cell.error = e.what();
        }
    });

    const GridCell *best = nullptr;
    for (const auto &cell : res.table) {
        if (!cell.accuracy) continue;
        const bool better = !best || *cell.accuracy > *best->accuracy ||
                            (*cell.accuracy == *best->accuracy &&
                             (cell.c_param < best->c_param || (cell.c_param == best->c_param && cell.sigma < best->sigma)));
        if (better) best = &cell;
    }
    if (!best) throw NumericalError("grid search: training failed for every cell");
    res.best_c = best->c_param;
    res.best_sigma = best->sigma;
    res.best_accuracy = *best->accuracy;
    return res;
}

}  // namespace cvm
