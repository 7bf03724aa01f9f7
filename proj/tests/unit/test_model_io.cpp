// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "error.hpp"
#include "gsv.hpp"
#include "helpers.hpp"
#include "model_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cvm;

namespace {

const std::string fixtures = std::string(CVM_FIXTURE_DIR) + "/libsvm/";

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "label dec_1 dec_2 ..." per line.
std::vector<std::vector<double>> read_decisions(const std::string &path) {
    std::ifstream in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(row);
    }
    return rows;
}

const SvmModel &pair_of(const MultiClassModel &m, int neg, int pos) {
    for (const auto &p : m.pairs)
        if (p.class_pair == std::pair{neg, pos}) return p;
    throw std::runtime_error("pair not found");
}

const char *minimal =
    "svm_type c_svc\n"
    "kernel_type rbf\n"
    "gamma 0.5\n"
    "nr_class 2\n"
    "total_sv 1\n"
    "rho 0.25\n"
    "label 1 -1\n"
    "nr_sv 1 0\n"
    "SV\n"
    "0.75 1:1 2:-2 \n";

}  // namespace

TEST_CASE("minimal binary model") {
    const MultiClassModel mm = parse_model(minimal);
    const SvmModel &m = binary_model(mm);
    CHECK(m.n_sv() == 1);
    CHECK(m.coef[0] == 0.75);
    CHECK(m.bias == -0.25);
    CHECK(m.kernel.sigma == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.class_pair == std::pair{-1, 1});
    CHECK(m.support_vectors(0, 1) == -2.0);
    CHECK(model_to_string(m) == minimal);
}

TEST_CASE("header conventions") {
    SvmModel m;
    m.support_vectors = Matrix{{0.5, 0.0}};
    m.coef = Vector::Constant(1, -1.5);
    m.bias = -0.25;
    m.kernel = KernelParams{1.0};
    const std::string text = model_to_string(m);
    CHECK(text.find("gamma 0.5\n") != std::string::npos);
    CHECK(text.find("rho 0.25\n") != std::string::npos);
    CHECK(text.find("label 1 -1\n") != std::string::npos);
    CHECK(text.find("nr_sv 0 1\n") != std::string::npos);
}

TEST_CASE("write-read-write is a byte fixpoint and preserves predictions") {
    std::mt19937_64 rng(1);
    const Matrix probes = test::random_matrix(rng, 100, 3);

    SvmModel bin = test::random_model(rng, 12, 3, 0.9);
    bin.class_pair = {2, 7};
    const std::string t1 = model_to_string(bin);
    const MultiClassModel back = parse_model(t1);
    CHECK(model_to_string(back) == t1);
    CHECK((predict_scores(binary_model(back), probes) - predict_scores(bin, probes)).cwiseAbs().maxCoeff() < 1e-9);

    CompressedModel cm;
    cm.support_vectors = test::random_matrix(rng, 4, 3);
    cm.coef = test::random_vector(rng, 4);
    cm.bias = 0.125;
    std::ostringstream cs;
    write_model(cs, cm);
    CHECK(cs.str() == model_to_string(to_model(cm)));
    CHECK((predict_scores(binary_model(parse_model(cs.str())), probes) - predict_scores(to_model(cm), probes))
              .cwiseAbs()
              .maxCoeff() < 1e-9);

    MultiClassModel multi;
    multi.classes = {1, 2, 3};
    const std::pair<int, int> pairs[] = {{1, 2}, {1, 3}, {2, 3}};
    for (const auto &pr : pairs) {
        SvmModel p = test::random_model(rng, 5, 3, 0.9);
        p.class_pair = pr;
        multi.pairs.push_back(p);
    }
    // Shared support vector between two pairs.
    multi.pairs[1].support_vectors.row(0) = multi.pairs[0].support_vectors.row(0);
    const std::string mt = model_to_string(multi);
    const MultiClassModel mback = parse_model(mt);
    CHECK(model_to_string(mback) == mt);
    for (const auto &p : multi.pairs) {
        const SvmModel &q = pair_of(mback, p.class_pair.first, p.class_pair.second);
        CHECK((predict_scores(q, probes) - predict_scores(p, probes)).cwiseAbs().maxCoeff() < 1e-9);
    }
    for (Eigen::Index i = 0; i < probes.rows(); ++i) CHECK(predict_label(mback, probes.row(i)) == predict_label(multi, probes.row(i)));
}

TEST_CASE("file round trip") {
    std::mt19937_64 rng(2);
    const SvmModel m = test::random_model(rng, 5, 2);
    const auto path = std::filesystem::temp_directory_path() / "cvm_test_model.txt";
    save_model(path.string(), m);
    CHECK(model_to_string(binary_model(load_model(path.string()))) == model_to_string(m));
    std::filesystem::remove(path);
    CHECK_THROWS_AS((void)load_model(path.string()), DataError);
}

TEST_CASE("LibSVM binary fixture reproduces the reference decision values") {
    const MultiClassModel mm = load_model(fixtures + "binary.model");
    const SvmModel &m = binary_model(mm);
    CHECK(m.n_sv() == 14);
    const Dataset probes = load_libsvm(fixtures + "probes.txt", m.dim());
    const auto ref = read_decisions(fixtures + "binary.decision");
    REQUIRE(ref.size() == probes.size());
    const Vector s = predict_scores(m, probes.features());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(std::abs(s[static_cast<Eigen::Index>(i)] - ref[i][1]) < 1e-6);
        CHECK(predict_label(mm, probes.row(i)) == static_cast<int>(ref[i][0]));
    }
}

TEST_CASE("LibSVM multi-class fixture reproduces the reference decision values") {
    const MultiClassModel mm = load_model(fixtures + "multi.model");
    CHECK(mm.classes == std::vector<int>{1, 2, 3});
    const Dataset probes = load_libsvm(fixtures + "probes.txt", mm.dim());
    const auto ref = read_decisions(fixtures + "multi.decision");
    REQUIRE(ref.size() == probes.size());
    // File label order 1 3 2: pairs (1,3), (1,2), (3,2), positive toward the first.
    const SvmModel *p[] = {&pair_of(mm, 3, 1), &pair_of(mm, 2, 1), &pair_of(mm, 2, 3)};
    for (std::size_t i = 0; i < ref.size(); ++i) {
        for (int k = 0; k < 3; ++k) CHECK(std::abs(predict_score(*p[k], probes.row(i)) - ref[i][static_cast<std::size_t>(k + 1)]) < 1e-6);
    }
}

TEST_CASE("LibSVM fixtures reach a fixpoint after one rewrite") {
    for (const char *name : {"binary.model", "multi.model"}) {
        const std::string once = model_to_string(load_model(fixtures + name));
        CHECK(model_to_string(parse_model(once)) == once);
    }
}

TEST_CASE("malformed and unsupported files") {
    auto with = [](const std::string &from, const std::string &to) {
        std::string s = minimal;
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    CHECK_THROWS_AS((void)parse_model(with("kernel_type rbf", "kernel_type polynomial")), DataError);
    CHECK_THROWS_AS((void)parse_model(with("svm_type c_svc", "svm_type nu_svc")), DataError);
    CHECK_THROWS_AS((void)parse_model(with("total_sv 1", "total_sv 2")), DataError);
    CHECK_THROWS_AS((void)parse_model(with("nr_sv 1 0", "nr_sv 1 1")), DataError);
    CHECK_THROWS_AS((void)parse_model(with("gamma 0.5", "gamma -1")), DataError);
    CHECK_THROWS_AS((void)parse_model(with("0.75 1:1", "x 1:1")), ParseError);
    CHECK_THROWS_AS((void)parse_model(with("SV\n", "")), DataError);
    CHECK_THROWS_AS((void)parse_model(with("rho 0.25\n", "")), DataError);
    try {
        (void)parse_model(with("0.75 1:1 2:-2", "0.75 2:1 1:-2"));
        FAIL("expected a parse error");
    } catch (const ParseError &e) {
        CHECK(e.line() == 10);
    }
    CHECK_THROWS_AS((void)binary_model(load_model(fixtures + "multi.model")), UsageError);
}
