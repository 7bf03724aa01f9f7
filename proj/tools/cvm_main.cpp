// SPDX-License-Identifier: Apache-2.0
// Command-line driver over the C API.
#include <cvm/cvm.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Failure {
    int code;
    std::string message;
};

void check(cvm_status s) {
    if (s == CVM_OK) return;
    const int code = s == CVM_ERR_USAGE ? 1 : s == CVM_ERR_DATA ? 2 : 3;
    throw Failure{code, cvm_last_error()};
}

void usage(const std::string &message) { throw Failure{1, message}; }

struct DatasetDeleter {
    void operator()(cvm_dataset *p) const { cvm_dataset_free(p); }
};
struct ModelDeleter {
    void operator()(cvm_model *p) const { cvm_model_free(p); }
};
struct ScalerDeleter {
    void operator()(cvm_scaler *p) const { cvm_scaler_free(p); }
};
using Dataset = std::unique_ptr<cvm_dataset, DatasetDeleter>;
using Model = std::unique_ptr<cvm_model, ModelDeleter>;
using Scaler = std::unique_ptr<cvm_scaler, ScalerDeleter>;

Dataset load_dataset(const std::string &path) {
    cvm_dataset *p = nullptr;
    check(cvm_dataset_load(path.c_str(), &p));
    return Dataset(p);
}

Model load_model(const std::string &path) {
    cvm_model *p = nullptr;
    check(cvm_model_load(path.c_str(), &p));
    return Model(p);
}

std::string scale_path(const std::string &model_path) { return model_path + ".scale"; }

Scaler load_scaler(const std::string &model_path) {
    cvm_scaler *p = nullptr;
    check(cvm_scaler_load(scale_path(model_path).c_str(), &p));
    return Scaler(p);
}

Dataset scaled(const Scaler &s, Dataset ds) {
    if (!s) return ds;
    cvm_dataset *p = nullptr;
    check(cvm_scaler_apply(s.get(), ds.get(), &p));
    return Dataset(p);
}

struct Options {
    unsigned threads = 0;
    std::string data, test, model, out;
    double c = 1.0;
    double sigma = 1.0;
    std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
    std::vector<double> sigma_grid{0.25, 0.5, 1.0, 2.0, 4.0};
    double val_frac = 0.2;
    std::optional<std::size_t> budget;
    std::optional<double> budget_cost;
    double per_kernel_cost = 1.0;
    int iters = 2560;
    bool lars_only = false;
    bool train_anchors = false;
    std::size_t step = 10;
    std::size_t max_sv = 100;
    bool standardize = false;
    std::uint64_t seed = 0;
    std::size_t n = 600;
};

void run_synth(const Options &o) {
    cvm_dataset *p = nullptr;
    check(cvm_dataset_synth_circle(o.n, o.seed, &p));
    Dataset ds(p);
    check(cvm_dataset_save(ds.get(), o.out.c_str()));
    std::printf("wrote %zu samples to %s\n", cvm_dataset_size(ds.get()), o.out.c_str());
}

cvm_train_options train_options(const Options &o) {
    cvm_train_options t;
    cvm_train_options_init(&t);
    t.c = o.c;
    t.sigma = o.sigma;
    return t;
}

// Fits the standardization on `ds` when requested and returns the scaled data.
Dataset maybe_fit_scaler(const Options &o, Dataset ds, Scaler *fitted) {
    if (!o.standardize) return ds;
    cvm_scaler *p = nullptr;
    check(cvm_scaler_fit(ds.get(), &p));
    Scaler s(p);
    ds = scaled(s, std::move(ds));
    if (fitted) *fitted = std::move(s);
    return ds;
}

void train_and_save(const Options &o, const Dataset &ds, const cvm_train_options &t, const Scaler &s) {
    cvm_model *p = nullptr;
    check(cvm_train(ds.get(), &t, &p));
    Model m(p);
    check(cvm_model_save(m.get(), o.model.c_str()));
    if (s) check(cvm_scaler_save(s.get(), scale_path(o.model).c_str()));
    std::printf("trained on %zu samples: %zu support vectors, model written to %s\n", cvm_dataset_size(ds.get()),
                cvm_model_n_sv(m.get()), o.model.c_str());
}

void run_train(const Options &o) {
    Scaler s;
    Dataset ds = maybe_fit_scaler(o, load_dataset(o.data), &s);
    train_and_save(o, ds, train_options(o), s);
}

void run_grid(const Options &o) {
    Scaler s;
    Dataset ds = maybe_fit_scaler(o, load_dataset(o.data), &s);
    const cvm_train_options base = train_options(o);
    std::vector<cvm_grid_cell> cells(o.c_grid.size() * o.sigma_grid.size());
    double best_c = 0.0, best_sigma = 0.0, best_acc = 0.0;
    check(cvm_grid_search(ds.get(), o.c_grid.data(), o.c_grid.size(), o.sigma_grid.data(), o.sigma_grid.size(),
                          o.val_frac, o.seed, &base, cells.data(), &best_c, &best_sigma, &best_acc));
    std::printf("%-12s %-12s %s\n", "c", "sigma", "accuracy");
    for (const auto &cell : cells) {
        if (cell.ok)
            std::printf("%-12g %-12g %.6f\n", cell.c, cell.sigma, cell.accuracy);
        else
            std::printf("%-12g %-12g failed\n", cell.c, cell.sigma);
    }
    std::printf("best c %g sigma %g accuracy %.6f\n", best_c, best_sigma, best_acc);
    if (!o.model.empty()) {
        cvm_train_options t = base;
        t.c = best_c;
        t.sigma = best_sigma;
        train_and_save(o, ds, t, s);
    }
}

std::size_t resolve_budget(const Options &o) {
    if (o.budget && o.budget_cost) usage("give either --budget or --budget-cost, not both");
    if (o.budget) return *o.budget;
    if (!o.budget_cost) usage("compress needs --budget or --budget-cost");
    std::size_t m = 0;
    check(cvm_budget_from_cost(*o.budget_cost, o.per_kernel_cost, &m));
    return m;
}

cvm_compress_options compress_options(const Options &o) {
    cvm_compress_options c;
    cvm_compress_options_init(&c);
    c.max_iters = o.iters;
    c.lars_only = o.lars_only ? 1 : 0;
    c.training_anchors = o.train_anchors ? 1 : 0;
    return c;
}

void run_compress(const Options &o) {
    const std::size_t m = resolve_budget(o);
    Model src = load_model(o.model);
    Scaler s = o.standardize ? load_scaler(o.model) : Scaler();
    Dataset ds = scaled(s, load_dataset(o.data));
    const cvm_compress_options c = compress_options(o);
    cvm_compress_report rep{};
    cvm_model *p = nullptr;
    check(cvm_compress(src.get(), m, &c, ds.get(), &p, &rep));
    Model out(p);
    check(cvm_model_save(out.get(), o.out.c_str()));
    if (s) check(cvm_scaler_save(s.get(), scale_path(o.out).c_str()));
    double cost = 0.0;
    check(cvm_evaluation_cost(out.get(), o.per_kernel_cost, &cost));
    std::printf("n_sv %zu\ncost %g\n", cvm_model_n_sv(out.get()), cost);
    if (!o.lars_only) {
        std::printf("iterations %zu\nloss %.10g -> %.10g\n", rep.iterations, rep.initial_loss, rep.final_loss);
    }
    std::printf("model written to %s\n", o.out.c_str());
}

void run_eval(const Options &o) {
    const std::string &path = o.test.empty() ? o.data : o.test;
    if (path.empty()) usage("eval needs --data or --test");
    Model m = load_model(o.model);
    Scaler s = o.standardize ? load_scaler(o.model) : Scaler();
    Dataset ds = scaled(s, load_dataset(path));
    double acc = 0.0, cost = 0.0;
    check(cvm_accuracy(m.get(), ds.get(), &acc));
    check(cvm_evaluation_cost(m.get(), o.per_kernel_cost, &cost));
    std::printf("accuracy %.6f\nn_sv %zu\ncost %g\n", acc, cvm_model_n_sv(m.get()), cost);
}

void run_curve(const Options &o) {
    Model m = load_model(o.model);
    Scaler s = o.standardize ? load_scaler(o.model) : Scaler();
    Dataset train = scaled(s, load_dataset(o.data));
    Dataset test = scaled(s, load_dataset(o.test));
    const cvm_compress_options c = compress_options(o);
    cvm_curve_point *points = nullptr;
    std::size_t n = 0;
    check(cvm_curve(m.get(), train.get(), test.get(), o.step, o.max_sv, o.per_kernel_cost, &c, &points, &n));
    std::unique_ptr<cvm_curve_point, void (*)(cvm_curve_point *)> hold(points, cvm_curve_free);
    check(cvm_curve_write_csv(points, n, o.out.c_str()));
    std::printf("%-6s %-10s %-10s %-10s %s\n", "n_sv", "cost", "acc_lars", "acc_cvm", "acc_full");
    for (std::size_t i = 0; i < n; ++i) {
        std::printf("%-6zu %-10g %-10.4f %-10.4f %.4f\n", points[i].n_sv, points[i].cost, points[i].acc_lars,
                    points[i].acc_cvm, points[i].acc_full);
    }
    std::printf("curve written to %s\n", o.out.c_str());
}

}  // namespace

int main(int argc, char **argv) {
    Options o;
    CLI::App app{"Train RBF support vector machines and compress them to a budget of support vectors."};
    app.require_subcommand(1);
    app.add_option("--threads", o.threads, "Worker thread cap (0 = all cores)");

    auto *synth = app.add_subcommand("synth", "Generate the two-circle synthetic dataset");
    synth->add_option("--n", o.n, "Number of samples (even)")->capture_default_str();
    synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    synth->add_option("--out", o.out, "Output LibSVM file")->required();

    auto *train = app.add_subcommand("train", "Train a full squared-hinge RBF SVM");
    train->add_option("--data", o.data, "Training data (LibSVM format)")->required();
    train->add_option("--c", o.c, "Regularization constant C")->capture_default_str();
    train->add_option("--sigma", o.sigma, "RBF bandwidth")->capture_default_str();
    train->add_option("--model", o.model, "Output model file")->required();
    train->add_flag("--standardize", o.standardize, "Standardize features; the map is saved to <model>.scale");

    auto *grid = app.add_subcommand("grid", "Grid search over C and sigma on a validation split");
    grid->add_option("--data", o.data, "Training data (LibSVM format)")->required();
    grid->add_option("--c-grid", o.c_grid, "Comma-separated C values")->delimiter(',')->capture_default_str();
    grid->add_option("--sigma-grid", o.sigma_grid, "Comma-separated sigma values")->delimiter(',')->capture_default_str();
    grid->add_option("--val-frac", o.val_frac, "Validation fraction")->capture_default_str();
    grid->add_option("--seed", o.seed, "Split seed")->capture_default_str();
    grid->add_option("--model", o.model, "Also train on all data with the best pair and write this model");
    grid->add_flag("--standardize", o.standardize, "Standardize features");

    auto *compress = app.add_subcommand("compress", "Compress a model to a support-vector budget");
    compress->add_option("--model", o.model, "Source model file")->required();
    compress->add_option("--data", o.data, "Training data of the source model")->required();
    compress->add_option("--out", o.out, "Output model file")->required();
    compress->add_option("--budget", o.budget, "Support vectors per class pair");
    compress->add_option("--budget-cost", o.budget_cost, "Evaluation-cost budget B_e");
    compress->add_option("--per-kernel-cost", o.per_kernel_cost, "Cost e of one kernel evaluation")->capture_default_str();
    compress->add_option("--iters", o.iters, "Conjugate gradient iterations")->capture_default_str();
    compress->add_flag("--lars-only", o.lars_only, "Stop after support vector selection");
    compress->add_flag("--train-anchors", o.train_anchors, "Match predictions on --data instead of the support vectors");
    compress->add_flag("--standardize", o.standardize, "Apply <model>.scale to the data");

    auto *eval = app.add_subcommand("eval", "Report accuracy, support vectors and evaluation cost");
    eval->add_option("--model", o.model, "Model file")->required();
    eval->add_option("--data", o.data, "Labeled data");
    eval->add_option("--test", o.test, "Labeled data (takes precedence over --data)");
    eval->add_option("--per-kernel-cost", o.per_kernel_cost, "Cost e of one kernel evaluation")->capture_default_str();
    eval->add_flag("--standardize", o.standardize, "Apply <model>.scale to the data");

    auto *curve = app.add_subcommand("curve", "Accuracy versus support vectors for LARS-SVM and CVM");
    curve->add_option("--model", o.model, "Full model file")->required();
    curve->add_option("--data", o.data, "Training data")->required();
    curve->add_option("--test", o.test, "Test data")->required();
    curve->add_option("--out", o.out, "Output CSV")->required();
    curve->add_option("--step", o.step, "Budget increment")->capture_default_str();
    curve->add_option("--max-sv", o.max_sv, "Largest budget")->capture_default_str();
    curve->add_option("--iters", o.iters, "Conjugate gradient iterations")->capture_default_str();
    curve->add_option("--per-kernel-cost", o.per_kernel_cost, "Cost e of one kernel evaluation")->capture_default_str();
    curve->add_flag("--train-anchors", o.train_anchors, "Match predictions on --data instead of the support vectors");
    curve->add_flag("--standardize", o.standardize, "Apply <model>.scale to the data");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        cvm_set_threads(o.threads);
        if (*synth) run_synth(o);
        else if (*train) run_train(o);
        else if (*grid) run_grid(o);
        else if (*compress) run_compress(o);
        else if (*eval) run_eval(o);
        else if (*curve) run_curve(o);
    } catch (const Failure &f) {
        std::fprintf(stderr, "cvm: error: %s\n", f.message.c_str());
        return f.code;
    }
    return 0;
}
