// SPDX-License-Identifier: Apache-2.0
#include "cvm/cvm.h"

#include "compress.hpp"
#include "data.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "gsv.hpp"
#include "log.hpp"
#include "model_io.hpp"
#include "parallel.hpp"
#include "svm.hpp"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>
#include <vector>

struct cvm_dataset {
    cvm::Dataset ds;
};

struct cvm_scaler {
    cvm::Standardization map;
};

struct cvm_model {
    cvm::MultiClassModel m;
};

namespace {

thread_local std::string t_last_error;

cvm_status fail(cvm_status s, const char *what) {
    t_last_error = what;
    return s;
}

template <typename F>
cvm_status guarded(F &&body) {
    try {
        body();
        return CVM_OK;
    } catch (const cvm::Error &e) {
        return fail(static_cast<cvm_status>(e.kind()), e.what());
    } catch (const std::bad_alloc &) {
        return fail(CVM_ERR_INTERNAL, "out of memory");
    } catch (const std::exception &e) {
        return fail(CVM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(CVM_ERR_INTERNAL, "unknown error");
    }
}

void require(const void *p, const char *name) {
    if (p == nullptr) throw cvm::UsageError(std::string(name) + " must not be NULL");
}

cvm::TrainConfig train_config(const cvm_train_options *opt) {
    cvm::TrainConfig cfg;
    if (opt != nullptr) {
        cfg.c_param = opt->c;
        cfg.kernel.sigma = opt->sigma;
        cfg.max_newton_iters = opt->max_newton_iters;
        cfg.grad_tol = opt->grad_tol;
    }
    return cfg;
}

cvm::GsvConfig gsv_config(const cvm_compress_options *opt) {
    cvm::GsvConfig cfg;
    if (opt != nullptr) {
        cfg.max_iters = opt->max_iters;
        cfg.loss_rel_tol = opt->loss_rel_tol;
        cfg.grad_tol = opt->grad_tol;
        cfg.anchors = opt->training_anchors ? cvm::AnchorMode::training_points : cvm::AnchorMode::support_vectors;
    }
    return cfg;
}

cvm::Dataset padded(const cvm::Dataset &ds, std::size_t dim) { return ds.dim() < dim ? ds.with_dim(dim) : ds; }

}  // namespace

extern "C" {

const char *cvm_last_error(void) { return t_last_error.c_str(); }

const char *cvm_version(void) { return "0.1.0"; }

void cvm_set_threads(unsigned n) { cvm::set_max_threads(n); }

cvm_status cvm_set_log_level(const char *name) {
    return guarded([&] {
        require(name, "name");
        if (!cvm::set_log_level(name)) throw cvm::UsageError(std::string("unknown log level '") + name + "'");
    });
}

cvm_status cvm_dataset_load(const char *path, cvm_dataset **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new cvm_dataset{cvm::load_libsvm(path)};
    });
}

cvm_status cvm_dataset_parse(const char *text, cvm_dataset **out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new cvm_dataset{cvm::parse_libsvm(std::string(text))};
    });
}

cvm_status cvm_dataset_from_dense(const double *x, const int *labels, size_t n, size_t d, cvm_dataset **out) {
    return guarded([&] {
        require(out, "out");
        if (n > 0) {
            require(x, "x");
            require(labels, "labels");
        }
        cvm::Matrix m = Eigen::Map<const cvm::Matrix>(x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        *out = new cvm_dataset{cvm::Dataset(std::move(m), std::vector<int>(labels, labels + n))};
    });
}

cvm_status cvm_dataset_synth_circle(size_t n, uint64_t seed, cvm_dataset **out) {
    return guarded([&] {
        require(out, "out");
        *out = new cvm_dataset{cvm::generate_circle_synthetic(n, seed)};
    });
}

cvm_status cvm_dataset_save(const cvm_dataset *ds, const char *path) {
    return guarded([&] {
        require(ds, "dataset");
        require(path, "path");
        cvm::save_libsvm(path, ds->ds);
    });
}

cvm_status cvm_dataset_split(const cvm_dataset *ds, double validation_fraction, uint64_t seed, cvm_dataset **train,
                             cvm_dataset **validation) {
    return guarded([&] {
        require(ds, "dataset");
        require(train, "train");
        require(validation, "validation");
        auto [t, v] = cvm::split(ds->ds, cvm::SplitSpec{validation_fraction, seed});
        auto *tp = new cvm_dataset{std::move(t)};
        try {
            *validation = new cvm_dataset{std::move(v)};
        } catch (...) {
            delete tp;
            throw;
        }
        *train = tp;
    });
}

size_t cvm_dataset_size(const cvm_dataset *ds) { return ds ? ds->ds.size() : 0; }

size_t cvm_dataset_dim(const cvm_dataset *ds) { return ds ? ds->ds.dim() : 0; }

void cvm_dataset_free(cvm_dataset *ds) { delete ds; }

cvm_status cvm_scaler_fit(const cvm_dataset *train, cvm_scaler **out) {
    return guarded([&] {
        require(train, "train");
        require(out, "out");
        *out = new cvm_scaler{cvm::fit_standardization(train->ds)};
    });
}

cvm_status cvm_scaler_load(const char *path, cvm_scaler **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new cvm_scaler{cvm::Standardization::load(path)};
    });
}

cvm_status cvm_scaler_save(const cvm_scaler *s, const char *path) {
    return guarded([&] {
        require(s, "scaler");
        require(path, "path");
        s->map.save(path);
    });
}

cvm_status cvm_scaler_apply(const cvm_scaler *s, const cvm_dataset *in, cvm_dataset **out) {
    return guarded([&] {
        require(s, "scaler");
        require(in, "dataset");
        require(out, "out");
        *out = new cvm_dataset{s->map.apply(in->ds)};
    });
}

void cvm_scaler_free(cvm_scaler *s) { delete s; }

void cvm_train_options_init(cvm_train_options *opt) {
    if (opt == nullptr) return;
    const cvm::TrainConfig cfg;
    opt->c = cfg.c_param;
    opt->sigma = cfg.kernel.sigma;
    opt->max_newton_iters = cfg.max_newton_iters;
    opt->grad_tol = cfg.grad_tol;
}

cvm_status cvm_train(const cvm_dataset *ds, const cvm_train_options *opt, cvm_model **out) {
    return guarded([&] {
        require(ds, "dataset");
        require(out, "out");
        *out = new cvm_model{cvm::train_any(ds->ds, train_config(opt))};
    });
}

cvm_status cvm_grid_search(const cvm_dataset *ds, const double *c_grid, size_t n_c, const double *sigma_grid,
                           size_t n_sigma, double validation_fraction, uint64_t seed, const cvm_train_options *base,
                           cvm_grid_cell *cells, double *best_c, double *best_sigma, double *best_accuracy) {
    return guarded([&] {
        require(ds, "dataset");
        if (n_c == 0 || n_sigma == 0) throw cvm::UsageError("grid must not be empty");
        require(c_grid, "c_grid");
        require(sigma_grid, "sigma_grid");
        const auto r = cvm::grid_search(ds->ds, {c_grid, n_c}, {sigma_grid, n_sigma},
                                        cvm::SplitSpec{validation_fraction, seed}, train_config(base));
        if (cells != nullptr) {
            for (std::size_t i = 0; i < r.table.size(); ++i) {
                cells[i] = cvm_grid_cell{r.table[i].c_param, r.table[i].sigma, r.table[i].accuracy.value_or(0.0),
                                         r.table[i].accuracy.has_value() ? 1 : 0};
            }
        }
        if (best_c) *best_c = r.best_c;
        if (best_sigma) *best_sigma = r.best_sigma;
        if (best_accuracy) *best_accuracy = r.best_accuracy;
    });
}

cvm_status cvm_model_load(const char *path, cvm_model **out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new cvm_model{cvm::load_model(path)};
    });
}

cvm_status cvm_model_parse(const char *text, cvm_model **out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = new cvm_model{cvm::parse_model(text)};
    });
}

cvm_status cvm_model_save(const cvm_model *m, const char *path) {
    return guarded([&] {
        require(m, "model");
        require(path, "path");
        cvm::save_model(path, m->m);
    });
}

cvm_status cvm_model_to_string(const cvm_model *m, char **out) {
    return guarded([&] {
        require(m, "model");
        require(out, "out");
        const std::string s = cvm::model_to_string(m->m);
        char *buf = static_cast<char *>(std::malloc(s.size() + 1));
        if (buf == nullptr) throw std::bad_alloc();
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *out = buf;
    });
}

void cvm_string_free(char *s) { std::free(s); }

size_t cvm_model_n_sv(const cvm_model *m) { return m ? m->m.n_sv() : 0; }

size_t cvm_model_n_classes(const cvm_model *m) { return m ? m->m.classes.size() : 0; }

size_t cvm_model_dim(const cvm_model *m) { return m ? m->m.dim() : 0; }

cvm_status cvm_model_decision_values(const cvm_model *m, const double *x, size_t n, size_t d, double *out) {
    return guarded([&] {
        require(m, "model");
        const cvm::SvmModel &p = cvm::binary_model(m->m);
        if (n == 0) return;
        require(x, "x");
        require(out, "out");
        if (d > p.dim()) throw cvm::UsageError("points have more features than the model");
        cvm::Matrix pts = cvm::Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p.dim()));
        pts.leftCols(static_cast<Eigen::Index>(d)) =
            Eigen::Map<const cvm::Matrix>(x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        const cvm::Vector s = cvm::predict_scores(p, pts);
        for (std::size_t i = 0; i < n; ++i) out[i] = s[static_cast<Eigen::Index>(i)];
    });
}

cvm_status cvm_model_predict(const cvm_model *m, const cvm_dataset *ds, int *labels) {
    return guarded([&] {
        require(m, "model");
        require(ds, "dataset");
        require(labels, "labels");
        const std::size_t d = std::max(m->m.dim(), ds->ds.dim());
        const cvm::MultiClassModel mm = m->m.dim() < d ? m->m.with_dim(d) : m->m;
        const auto pred = cvm::predict_labels(mm, padded(ds->ds, d).features());
        std::copy(pred.begin(), pred.end(), labels);
    });
}

void cvm_model_free(cvm_model *m) { delete m; }

void cvm_compress_options_init(cvm_compress_options *opt) {
    if (opt == nullptr) return;
    const cvm::GsvConfig cfg;
    opt->max_iters = cfg.max_iters;
    opt->loss_rel_tol = cfg.loss_rel_tol;
    opt->grad_tol = cfg.grad_tol;
    opt->lars_only = 0;
    opt->training_anchors = 0;
}

cvm_status cvm_budget_from_cost(double budget_cost, double per_kernel_cost, size_t *m) {
    return guarded([&] {
        require(m, "m");
        *m = cvm::CostBudget{per_kernel_cost, budget_cost}.max_support_vectors();
    });
}

cvm_status cvm_compress(const cvm_model *source, size_t budget, const cvm_compress_options *opt,
                        const cvm_dataset *train, cvm_model **out, cvm_compress_report *report) {
    return guarded([&] {
        require(source, "source");
        require(out, "out");
        const cvm::GsvConfig cfg = gsv_config(opt);
        const bool lars_only = opt != nullptr && opt->lars_only != 0;
        if (budget == 0) throw cvm::UsageError("budget must be at least one support vector");
        if (source->m.pairs.size() == 1 && budget > source->m.n_sv()) {
            throw cvm::UsageError("budget " + std::to_string(budget) + " exceeds the model's " +
                                  std::to_string(source->m.n_sv()) + " support vectors");
        }
        cvm::Matrix anchors;
        const cvm::Matrix *anchor_ptr = nullptr;
        if (cfg.anchors == cvm::AnchorMode::training_points && !lars_only) {
            require(train, "train");
            if (train->ds.dim() > source->m.dim()) throw cvm::UsageError("training data has more features than the model");
            anchors = padded(train->ds, source->m.dim()).features();
            anchor_ptr = &anchors;
        }
        cvm::MultiCompression mc = cvm::compress(source->m, budget, cfg, lars_only, anchor_ptr);
        if (report != nullptr) {
            *report = cvm_compress_report{0, 0.0, 0.0, 1, 0};
            for (const auto &g : mc.gsv) {
                report->iterations += static_cast<std::size_t>(g.model.iterations);
                report->initial_loss += g.loss_history.front();
                report->final_loss += g.loss_history.back();
                for (std::size_t i = 1; i < g.loss_history.size(); ++i) {
                    if (g.loss_history[i] > g.loss_history[i - 1]) report->monotone = 0;
                }
                if (g.line_search_failed) report->line_search_failed = 1;
            }
        }
        *out = new cvm_model{std::move(mc.cvm)};
    });
}

cvm_status cvm_accuracy(const cvm_model *m, const cvm_dataset *ds, double *out) {
    return guarded([&] {
        require(m, "model");
        require(ds, "dataset");
        require(out, "out");
        *out = cvm::accuracy(m->m, ds->ds);
    });
}

cvm_status cvm_evaluation_cost(const cvm_model *m, double per_kernel_cost, double *out) {
    return guarded([&] {
        require(m, "model");
        require(out, "out");
        if (!(per_kernel_cost > 0.0)) throw cvm::UsageError("per-kernel cost must be positive");
        *out = cvm::evaluation_cost(m->m, per_kernel_cost);
    });
}

cvm_status cvm_curve(const cvm_model *source, const cvm_dataset *train, const cvm_dataset *test, size_t step,
                     size_t max_sv, double per_kernel_cost, const cvm_compress_options *opt, cvm_curve_point **points,
                     size_t *n_points) {
    return guarded([&] {
        require(source, "source");
        require(train, "train");
        require(test, "test");
        require(points, "points");
        require(n_points, "n_points");
        cvm::CurveConfig cfg;
        cfg.step = step;
        cfg.max_sv = max_sv;
        cfg.per_kernel_cost = per_kernel_cost;
        cfg.gsv = gsv_config(opt);
        const auto curve = cvm::build_curve(source->m, train->ds, test->ds, cfg);
        auto *buf = static_cast<cvm_curve_point *>(std::malloc(std::max<std::size_t>(1, curve.size()) * sizeof(cvm_curve_point)));
        if (buf == nullptr) throw std::bad_alloc();
        for (std::size_t i = 0; i < curve.size(); ++i) {
            buf[i] = cvm_curve_point{curve[i].n_sv, curve[i].cost, curve[i].acc_lars, curve[i].acc_cvm, curve[i].acc_full};
        }
        *points = buf;
        *n_points = curve.size();
    });
}

cvm_status cvm_curve_write_csv(const cvm_curve_point *points, size_t n_points, const char *path) {
    return guarded([&] {
        require(path, "path");
        if (n_points > 0) require(points, "points");
        std::vector<cvm::CurvePoint> curve;
        for (std::size_t i = 0; i < n_points; ++i) {
            curve.push_back(cvm::CurvePoint{points[i].n_sv, points[i].cost, points[i].acc_lars, points[i].acc_cvm,
                                            points[i].acc_full});
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw cvm::DataError(std::string("cannot write '") + path + "'");
        cvm::write_curve_csv(out, curve);
        if (!out) throw cvm::DataError(std::string("write failed for '") + path + "'");
    });
}

void cvm_curve_free(cvm_curve_point *points) { std::free(points); }

}  // extern "C"
