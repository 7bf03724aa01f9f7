/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the compressed vector machine library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a cvm_status; on failure cvm_last_error()
 * describes the problem until the next failing call on the same thread.
 */
#ifndef CVM_CVM_H
#define CVM_CVM_H

#include <stddef.h>
#include <stdint.h>

#if defined(CVM_BUILDING_LIBRARY)
#define CVM_API __attribute__((visibility("default")))
#else
#define CVM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cvm_status {
    CVM_OK = 0,
    CVM_ERR_USAGE = 1,     /* invalid argument or precondition */
    CVM_ERR_DATA = 2,      /* malformed file or dataset */
    CVM_ERR_NUMERICAL = 3, /* solver breakdown */
    CVM_ERR_INTERNAL = 4   /* anything else, e.g. out of memory */
} cvm_status;

typedef struct cvm_dataset cvm_dataset;
typedef struct cvm_scaler cvm_scaler;
typedef struct cvm_model cvm_model;

CVM_API const char *cvm_last_error(void);
CVM_API const char *cvm_version(void);
/* 0 restores the default (hardware concurrency). */
CVM_API void cvm_set_threads(unsigned n);
/* "error", "info" or "debug". */
CVM_API cvm_status cvm_set_log_level(const char *name);

/* ---- datasets (LibSVM sparse text) ---- */

CVM_API cvm_status cvm_dataset_load(const char *path, cvm_dataset **out);
CVM_API cvm_status cvm_dataset_parse(const char *text, cvm_dataset **out);
/* x is row-major n x d. */
CVM_API cvm_status cvm_dataset_from_dense(const double *x, const int *labels, size_t n, size_t d, cvm_dataset **out);
CVM_API cvm_status cvm_dataset_synth_circle(size_t n, uint64_t seed, cvm_dataset **out);
CVM_API cvm_status cvm_dataset_save(const cvm_dataset *ds, const char *path);
CVM_API cvm_status cvm_dataset_split(const cvm_dataset *ds, double validation_fraction, uint64_t seed,
                                     cvm_dataset **train, cvm_dataset **validation);
CVM_API size_t cvm_dataset_size(const cvm_dataset *ds);
CVM_API size_t cvm_dataset_dim(const cvm_dataset *ds);
CVM_API void cvm_dataset_free(cvm_dataset *ds);

/* ---- per-feature standardization ---- */

CVM_API cvm_status cvm_scaler_fit(const cvm_dataset *train, cvm_scaler **out);
CVM_API cvm_status cvm_scaler_load(const char *path, cvm_scaler **out);
CVM_API cvm_status cvm_scaler_save(const cvm_scaler *s, const char *path);
CVM_API cvm_status cvm_scaler_apply(const cvm_scaler *s, const cvm_dataset *in, cvm_dataset **out);
CVM_API void cvm_scaler_free(cvm_scaler *s);

/* ---- training ---- */

typedef struct cvm_train_options {
    double c;
    double sigma;
    int max_newton_iters;
    double grad_tol;
} cvm_train_options;

CVM_API void cvm_train_options_init(cvm_train_options *opt);
/* Binary data gives one model; more classes give a one-vs-one ensemble. */
CVM_API cvm_status cvm_train(const cvm_dataset *ds, const cvm_train_options *opt, cvm_model **out);

typedef struct cvm_grid_cell {
    double c;
    double sigma;
    double accuracy; /* valid when ok != 0 */
    int ok;
} cvm_grid_cell;

/* cells receives n_c * n_sigma entries, row-major over (c, sigma). */
CVM_API cvm_status cvm_grid_search(const cvm_dataset *ds, const double *c_grid, size_t n_c, const double *sigma_grid,
                                   size_t n_sigma, double validation_fraction, uint64_t seed,
                                   const cvm_train_options *base, cvm_grid_cell *cells, double *best_c,
                                   double *best_sigma, double *best_accuracy);

/* ---- models (LibSVM model text) ---- */

CVM_API cvm_status cvm_model_load(const char *path, cvm_model **out);
CVM_API cvm_status cvm_model_parse(const char *text, cvm_model **out);
CVM_API cvm_status cvm_model_save(const cvm_model *m, const char *path);
/* Caller releases *out with cvm_string_free. */
CVM_API cvm_status cvm_model_to_string(const cvm_model *m, char **out);
CVM_API void cvm_string_free(char *s);
CVM_API size_t cvm_model_n_sv(const cvm_model *m);
CVM_API size_t cvm_model_n_classes(const cvm_model *m);
CVM_API size_t cvm_model_dim(const cvm_model *m);
/* Decision value of a two-class model for n row-major points of dimension d;
 * positive values predict the first label of the model file. */
CVM_API cvm_status cvm_model_decision_values(const cvm_model *m, const double *x, size_t n, size_t d, double *out);
/* labels receives cvm_dataset_size(ds) entries. */
CVM_API cvm_status cvm_model_predict(const cvm_model *m, const cvm_dataset *ds, int *labels);
CVM_API void cvm_model_free(cvm_model *m);

/* ---- compression ---- */

typedef struct cvm_compress_options {
    int max_iters;
    double loss_rel_tol;
    double grad_tol;
    int lars_only;       /* skip the gradient optimization */
    int training_anchors; /* match predictions on the training set instead of the support vectors */
} cvm_compress_options;

typedef struct cvm_compress_report {
    size_t iterations;     /* summed over pairs */
    double initial_loss;   /* summed over pairs */
    double final_loss;     /* summed over pairs */
    int monotone;          /* every pair's loss sequence was nonincreasing */
    int line_search_failed;
} cvm_compress_report;

CVM_API void cvm_compress_options_init(cvm_compress_options *opt);
/* floor(budget_cost / per_kernel_cost) support vectors. */
CVM_API cvm_status cvm_budget_from_cost(double budget_cost, double per_kernel_cost, size_t *m);
/* budget is per pair. A two-class model needs budget <= its support vector
 * count; ensembles clamp the budget per pair. train may be NULL unless
 * training_anchors is set. report may be NULL. */
CVM_API cvm_status cvm_compress(const cvm_model *source, size_t budget, const cvm_compress_options *opt,
                                const cvm_dataset *train, cvm_model **out, cvm_compress_report *report);

/* ---- evaluation ---- */

CVM_API cvm_status cvm_accuracy(const cvm_model *m, const cvm_dataset *ds, double *out);
CVM_API cvm_status cvm_evaluation_cost(const cvm_model *m, double per_kernel_cost, double *out);

typedef struct cvm_curve_point {
    size_t n_sv;
    double cost;
    double acc_lars;
    double acc_cvm;
    double acc_full;
} cvm_curve_point;

/* *points is released with cvm_curve_free. */
CVM_API cvm_status cvm_curve(const cvm_model *source, const cvm_dataset *train, const cvm_dataset *test, size_t step,
                             size_t max_sv, double per_kernel_cost, const cvm_compress_options *opt,
                             cvm_curve_point **points, size_t *n_points);
CVM_API cvm_status cvm_curve_write_csv(const cvm_curve_point *points, size_t n_points, const char *path);
CVM_API void cvm_curve_free(cvm_curve_point *points);

#ifdef __cplusplus
}
#endif

#endif /* CVM_CVM_H */
