// SPDX-License-Identifier: Apache-2.0
#include "compress.hpp"

#include "error.hpp"
#include "linalg.hpp"
#include "log.hpp"

#include <fmt/format.h>

#include <cmath>
#include <functional>
#include <limits>

namespace cvm {

CostBudget CostBudget::from_count(std::size_t m, double per_kernel_cost) {
    return CostBudget{per_kernel_cost, static_cast<double>(m) * per_kernel_cost};
}

std::size_t CostBudget::max_support_vectors() const {
    if (!(per_kernel_cost > 0.0) || !std::isfinite(per_kernel_cost))
        throw UsageError(fmt::format("per-kernel cost must be positive, got {}", per_kernel_cost));
    if (!std::isfinite(budget) || budget < 0.0) throw UsageError(fmt::format("invalid cost budget {}", budget));
    // B = m * e computed in floating point may land just below m * e.
    const double m = std::floor(budget / per_kernel_cost * (1.0 + 1e-12));
    if (m < 1.0) throw UsageError(fmt::format("budget {} buys no support vector at cost {}", budget, per_kernel_cost));
    return static_cast<std::size_t>(m);
}

Eigen::VectorXd support_vector_labels(const SvmModel &model) {
    Eigen::VectorXd y(model.coef.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = model.coef[i] > 0.0 ? 1.0 : -1.0;
    return y;
}

namespace {

void check_labels(const SvmModel &model, const Eigen::VectorXd &sv_labels) {
    model.validate();
    const auto n = static_cast<Eigen::Index>(model.n_sv());
    if (sv_labels.size() != n)
        throw UsageError(fmt::format("{} labels for {} support vectors", sv_labels.size(), n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sv_labels[i] != 1.0 && sv_labels[i] != -1.0)
            throw UsageError(fmt::format("support vector label {} is not +-1", sv_labels[i]));
    }
}

std::vector<std::size_t> identity_map(std::size_t n) {
    std::vector<std::size_t> map(n);
    for (std::size_t i = 0; i < n; ++i) map[i] = i;
    return map;
}

}  // namespace

LarsProblem build_surrogate(const SvmModel &model, double eig_floor) {
    return build_surrogate(model, support_vector_labels(model), eig_floor);
}

LarsProblem build_surrogate(const SvmModel &model, const Eigen::VectorXd &sv_labels, double eig_floor) {
    check_labels(model, sv_labels);
    const auto n = static_cast<Eigen::Index>(model.n_sv());
    if (!(eig_floor > 0.0) || !std::isfinite(eig_floor)) throw UsageError(fmt::format("invalid eigenvalue floor {}", eig_floor));

    const double b = model.bias;
    Eigen::VectorXd v;
    Eigen::MatrixXd h;
    {
        // Y K Y K with Y^2 = I collapses to K^2, and K Y (1 - y b) to K (y - b).
        const Eigen::MatrixXd k = kernel_matrix(model.support_vectors, model.support_vectors, model.kernel);
        h.resize(n, n);
        h.noalias() = k * k;
        h += k;
        v = k * (sv_labels.array() - b).matrix();
    }
    const double trace = h.trace();
    log().debug("surrogate: {} support vectors, trace {:.6g}", n, trace);

    SymmetricEigen eig = symmetric_eigen(std::move(h));
    const double d_max = eig.values.maxCoeff();
    const double d_min = eig.values.minCoeff();
    if (!std::isfinite(d_max) || !std::isfinite(d_min) || !(d_max > 0.0))
        throw NumericalError("surrogate matrix has no positive eigenvalue");
    if (d_min < -1e-6 * trace)
        throw NumericalError(fmt::format("surrogate matrix is not positive semidefinite (eigenvalue {:.6g})", d_min));

    LarsProblem p;
    p.eigvals = eig.values.cwiseMax(eig_floor * d_max);
    const Eigen::VectorXd sqrt_d = p.eigvals.cwiseSqrt();
    p.omega = sqrt_d.asDiagonal() * eig.vectors.transpose();
    p.beta = -(sqrt_d.cwiseInverse().asDiagonal() * (eig.vectors.transpose() * v));
    p.eigvecs = std::move(eig.vectors);
    p.fixed_bias = b;
    p.sv_index_map = identity_map(static_cast<std::size_t>(n));
    return p;
}

LarsGram build_gram_surrogate(const SvmModel &model) {
    return build_gram_surrogate(model, support_vector_labels(model));
}

LarsGram build_gram_surrogate(const SvmModel &model, const Eigen::VectorXd &sv_labels) {
    check_labels(model, sv_labels);
    const auto n = static_cast<Eigen::Index>(model.n_sv());
    LarsGram g;
    const Eigen::MatrixXd k = kernel_matrix(model.support_vectors, model.support_vectors, model.kernel);
    // K is symmetric, so K^2 = K K^T: a rank update on one triangle.
    g.gram = Eigen::MatrixXd::Zero(n, n);
    g.gram.selfadjointView<Eigen::Lower>().rankUpdate(k);
    g.gram.triangularView<Eigen::StrictlyUpper>() = g.gram.transpose();
    g.gram += k;
    g.corr0 = k * (sv_labels.array() - model.bias).matrix();
    g.fixed_bias = model.bias;
    g.sv_index_map = identity_map(static_cast<std::size_t>(n));
    log().debug("gram surrogate: {} support vectors", n);
    return g;
}

std::vector<std::size_t> LarsPath::active_set(std::size_t m) const {
    if (m > steps.size()) throw UsageError(fmt::format("path has {} steps, asked for {}", steps.size(), m));
    std::vector<std::size_t> out;
    out.reserve(m);
    for (std::size_t t = 0; t < m; ++t) out.push_back(steps[t].activated);
    return out;
}

namespace {

// Incrementally factored Gram matrix of the active columns.
class ActiveSet {
  public:
    using Column = std::function<Eigen::VectorXd(Eigen::Index)>;

    ActiveSet(Column column, std::size_t capacity)
        : column_(std::move(column)), chol_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(capacity), static_cast<Eigen::Index>(capacity))) {}

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(index_.size()); }
    [[nodiscard]] const std::vector<Eigen::Index> &index() const { return index_; }
    [[nodiscard]] const std::vector<Eigen::VectorXd> &gram_columns() const { return cols_; }

    // false (and no change) if column j is numerically dependent on the active ones
    bool add(Eigen::Index j) {
        Eigen::VectorXd g = column_(j);
        const Eigen::Index k = size();
        Eigen::VectorXd l(k);
        for (Eigen::Index i = 0; i < k; ++i) l[i] = g[index_[static_cast<std::size_t>(i)]];
        if (k > 0) chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>().solveInPlace(l);
        const double d = g[j] - l.squaredNorm();
        if (!(g[j] > 0.0) || !(d > 1e-12 * g[j])) return false;
        chol_.block(k, 0, 1, k) = l.transpose();
        chol_(k, k) = std::sqrt(d);
        index_.push_back(j);
        cols_.push_back(std::move(g));
        return true;
    }

    // G_A^{-1} rhs
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd &rhs) const {
        const Eigen::Index k = size();
        const auto l = chol_.topLeftCorner(k, k).triangularView<Eigen::Lower>();
        return l.transpose().solve(l.solve(rhs));
    }

  private:
    Column column_;
    Eigen::MatrixXd chol_;
    std::vector<Eigen::Index> index_;
    std::vector<Eigen::VectorXd> cols_;
};

// c0 holds the correlations at zero, column(j) the Gram column of coordinate j.
LarsPath run_lars(const Eigen::VectorXd &c0, ActiveSet::Column column, std::size_t m) {
    const Eigen::Index n = c0.size();
    if (m == 0 || m > static_cast<std::size_t>(n))
        throw UsageError(fmt::format("LARS budget {} outside [1, {}]", m, n));

    LarsPath path;
    path.budget = m;
    path.steps.reserve(m);

    Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
    std::vector<char> is_active(static_cast<std::size_t>(n), 0);
    ActiveSet active(std::move(column), m);

    Eigen::Index first = 0;
    c0.cwiseAbs().maxCoeff(&first);  // first maximum, i.e. lowest index on ties
    if (!(std::abs(c0[first]) > 0.0) || !active.add(first)) {
        path.truncated = true;
        return path;
    }
    is_active[static_cast<std::size_t>(first)] = 1;

    for (std::size_t t = 1; t <= m; ++t) {
        const Eigen::Index k = active.size();
        const auto &idx = active.index();
        const auto &gcols = active.gram_columns();

        // Correlations with the current residual, recomputed to avoid drift.
        Eigen::VectorXd c = c0;
        for (Eigen::Index i = 0; i < k; ++i) c.noalias() -= coef[idx[static_cast<std::size_t>(i)]] * gcols[static_cast<std::size_t>(i)];

        Eigen::VectorXd s(k);
        double c_hat = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) {
            const double ci = c[idx[static_cast<std::size_t>(i)]];
            s[i] = ci < 0.0 ? -1.0 : 1.0;
            c_hat = std::max(c_hat, std::abs(ci));
        }
        const Eigen::VectorXd w = active.solve(s);
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < k; ++i) a.noalias() += w[i] * gcols[static_cast<std::size_t>(i)];

        double gamma = std::numeric_limits<double>::infinity();
        Eigen::Index next = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (is_active[static_cast<std::size_t>(j)]) continue;
            for (const double sign : {1.0, -1.0}) {
                const double denom = 1.0 - sign * a[j];
                if (!(denom > 0.0)) continue;
                const double cand = (c_hat - sign * c[j]) / denom;
                if (cand > 0.0 && cand < gamma) {
                    gamma = cand;
                    next = j;
                }
            }
        }
        // With no inactive coordinate left to tie, the step runs to the
        // least-squares solution on the active set.
        if (next < 0 || gamma > c_hat) {
            gamma = c_hat;
            next = -1;
        }

        for (Eigen::Index i = 0; i < k; ++i) coef[idx[static_cast<std::size_t>(i)]] += gamma * w[i];
        path.steps.push_back(LarsStep{static_cast<std::size_t>(idx.back()), coef});

        if (t == m) break;
        if (next < 0 || !active.add(next)) {
            log().info("LARS path stops after {} of {} steps (rank deficient)", t, m);
            path.truncated = true;
            break;
        }
        is_active[static_cast<std::size_t>(next)] = 1;
    }
    return path;
}

}  // namespace

LarsPath lars_select(const LarsProblem &p, std::size_t m) {
    if (p.beta.size() != p.omega.rows())
        throw UsageError(fmt::format("omega has {} rows but beta has {} entries", p.omega.rows(), p.beta.size()));
    if (!p.omega.allFinite() || !p.beta.allFinite()) throw NumericalError("non-finite LARS problem");
    const Eigen::VectorXd c0 = p.omega.transpose() * (-p.beta);
    return run_lars(c0, [&p](Eigen::Index j) -> Eigen::VectorXd { return p.omega.transpose() * p.omega.col(j); }, m);
}

LarsPath lars_select(const LarsGram &g, std::size_t m) {
    if (g.gram.rows() != g.gram.cols() || g.gram.rows() != g.corr0.size())
        throw UsageError(fmt::format("Gram matrix {}x{} with {} correlations", g.gram.rows(), g.gram.cols(), g.corr0.size()));
    if (!g.gram.allFinite() || !g.corr0.allFinite()) throw NumericalError("non-finite LARS problem");
    return run_lars(g.corr0, [&g](Eigen::Index j) -> Eigen::VectorXd { return g.gram.col(j); }, m);
}

namespace {

LarsSvm extract_model(const SvmModel &source, double fixed_bias, const std::vector<std::size_t> &sv_index_map,
                      const LarsPath &path, std::size_t m) {
    if (m == 0 || m > path.steps.size())
        throw UsageError(fmt::format("LARS path has {} steps, asked for {}", path.steps.size(), m));
    const Eigen::VectorXd &coef = path.steps[m - 1].coef;

    LarsSvm out;
    out.path = path;
    std::vector<std::size_t> kept;
    for (const std::size_t j : path.active_set(m)) {
        if (coef[static_cast<Eigen::Index>(j)] != 0.0) kept.push_back(j);
    }
    if (kept.empty()) throw NumericalError("LARS selected no support vector with a nonzero coefficient");

    SvmModel &model = out.model;
    model.support_vectors.resize(static_cast<Eigen::Index>(kept.size()), source.support_vectors.cols());
    model.coef.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const auto src = static_cast<Eigen::Index>(sv_index_map.at(kept[i]));
        model.support_vectors.row(static_cast<Eigen::Index>(i)) = source.support_vectors.row(src);
        model.coef[static_cast<Eigen::Index>(i)] = coef[static_cast<Eigen::Index>(kept[i])];
        out.selected.push_back(static_cast<std::size_t>(src));
    }
    model.bias = fixed_bias;
    model.kernel = source.kernel;
    model.class_pair = source.class_pair;
    return out;
}

}  // namespace

LarsSvm lars_model(const SvmModel &source, const LarsProblem &p, const LarsPath &path, std::size_t m) {
    return extract_model(source, p.fixed_bias, p.sv_index_map, path, m);
}

LarsSvm lars_model(const SvmModel &source, const LarsGram &g, const LarsPath &path, std::size_t m) {
    return extract_model(source, g.fixed_bias, g.sv_index_map, path, m);
}

LarsSvm SupportVectorPath::model_at(const SvmModel &source, std::size_t m) const {
    return extract_model(source, fixed_bias, sv_index_map, path, m);
}

SupportVectorPath support_vector_path(const SvmModel &source, std::size_t max_steps, double eig_floor) {
    SupportVectorPath out;
    if (source.n_sv() > gram_form_threshold) {
        LarsGram g = build_gram_surrogate(source);
        out.path = lars_select(g, max_steps);
        out.fixed_bias = g.fixed_bias;
        out.sv_index_map = std::move(g.sv_index_map);
    } else {
        LarsProblem p = build_surrogate(source, eig_floor);
        out.path = lars_select(p, max_steps);
        out.fixed_bias = p.fixed_bias;
        out.sv_index_map = std::move(p.sv_index_map);
    }
    return out;
}

LarsSvm select_support_vectors(const SvmModel &source, const CostBudget &budget, double eig_floor) {
    const std::size_t m = budget.max_support_vectors();
    if (m > source.n_sv())
        throw UsageError(fmt::format("budget allows {} support vectors but the model has only {}", m, source.n_sv()));
    const SupportVectorPath sp = support_vector_path(source, m, eig_floor);
    if (sp.path.steps.empty()) throw NumericalError("LARS path is empty");
    return sp.model_at(source, sp.path.steps.size());
}

}  // namespace cvm
