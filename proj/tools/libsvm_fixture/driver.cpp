// SPDX-License-Identifier: Apache-2.0
// Reference-tool driver. Built against the LibSVM sources by make_fixture.sh,
// not by the project build.
//
//   driver train <data> <C> <gamma> <model>   svm_train + svm_save_model
//   driver predict <model> <points> <out>     svm_load_model + svm_predict_values
#include "svm.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct Rows {
    std::vector<double> labels;
    std::vector<std::vector<svm_node>> nodes;
};

Rows read_rows(const char *path) {
    Rows r;
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "cannot open %s\n", path);
        std::exit(2);
    }
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        double label;
        if (!(ls >> label)) continue;
        std::vector<svm_node> v;
        std::string tok;
        while (ls >> tok) {
            const auto colon = tok.find(':');
            v.push_back(svm_node{std::atoi(tok.substr(0, colon).c_str()), std::atof(tok.substr(colon + 1).c_str())});
        }
        v.push_back(svm_node{-1, 0.0});
        r.labels.push_back(label);
        r.nodes.push_back(std::move(v));
    }
    return r;
}

void quiet(const char *) {}

}  // namespace

int main(int argc, char **argv) {
    svm_set_print_string_function(quiet);
    if (argc == 6 && std::string(argv[1]) == "train") {
        Rows rows = read_rows(argv[2]);
        std::vector<svm_node *> x;
        for (auto &v : rows.nodes) x.push_back(v.data());
        svm_problem prob{static_cast<int>(x.size()), rows.labels.data(), x.data()};
        svm_parameter param{};
        param.svm_type = C_SVC;
        param.kernel_type = RBF;
        param.gamma = std::atof(argv[4]);
        param.C = std::atof(argv[3]);
        param.cache_size = 100;
        param.eps = 1e-3;
        param.shrinking = 1;
        if (const char *err = svm_check_parameter(&prob, &param)) {
            std::fprintf(stderr, "%s\n", err);
            return 1;
        }
        svm_model *model = svm_train(&prob, &param);
        if (svm_save_model(argv[5], model) != 0) return 2;
        svm_free_and_destroy_model(&model);
        return 0;
    }
    if (argc == 5 && std::string(argv[1]) == "predict") {
        svm_model *model = svm_load_model(argv[2]);
        if (model == nullptr) {
            std::fprintf(stderr, "svm_load_model failed for %s\n", argv[2]);
            return 2;
        }
        Rows rows = read_rows(argv[3]);
        const int k = svm_get_nr_class(model);
        std::vector<double> dec(static_cast<std::size_t>(k * (k - 1) / 2));
        std::FILE *out = std::fopen(argv[4], "w");
        for (auto &v : rows.nodes) {
            const double label = svm_predict_values(model, v.data(), dec.data());
            std::fprintf(out, "%g", label);
            for (double d : dec) std::fprintf(out, " %.17g", d);
            std::fprintf(out, "\n");
        }
        std::fclose(out);
        svm_free_and_destroy_model(&model);
        return 0;
    }
    std::fprintf(stderr, "usage: driver train <data> <C> <gamma> <model> | predict <model> <points> <out>\n");
    return 1;
}
