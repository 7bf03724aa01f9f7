// SPDX-License-Identifier: Apache-2.0
#include "model_io.hpp"

#include "error.hpp"
#include "text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

namespace cvm {

namespace {

struct ClassRows {
    std::vector<Eigen::RowVectorXd> features;
    std::vector<std::vector<double>> coef;  // nr_class - 1 columns
    std::multimap<std::string, std::size_t> lookup;
};

std::string row_key(const Eigen::RowVectorXd &x) {
    return std::string(reinterpret_cast<const char *>(x.data()), static_cast<std::size_t>(x.size()) * sizeof(double));
}

}  // namespace

void write_model(std::ostream &out, const MultiClassModel &m) {
    m.validate();
    const std::size_t k = m.classes.size();
    std::vector<int> labels;
    if (k == 2) {
        labels = {m.pairs.front().class_pair.second, m.pairs.front().class_pair.first};
    } else {
        labels.assign(m.classes.rbegin(), m.classes.rend());
    }
    const double gamma = m.pairs.front().kernel.gamma();
    for (const auto &p : m.pairs) {
        if (p.kernel.gamma() != m.pairs.front().kernel.gamma()) throw UsageError("all pairs of a model file must share one kernel");
    }

    std::vector<ClassRows> rows(k);
    std::vector<double> rho;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const auto it = std::find_if(m.pairs.begin(), m.pairs.end(), [&](const SvmModel &p) {
                return std::minmax(p.class_pair.first, p.class_pair.second) == std::minmax(labels[i], labels[j]);
            });
            const SvmModel &p = *it;
            // The file's pair (i, j) scores positive for labels[i].
            const double sign = p.class_pair.second == labels[i] ? 1.0 : -1.0;
            rho.push_back(-sign * p.bias);
            for (Eigen::Index s = 0; s < p.support_vectors.rows(); ++s) {
                const double c = sign * p.coef[s];
                const std::size_t owner = c > 0.0 ? i : j;
                const std::size_t other = owner == i ? j : i;
                const std::size_t col = other < owner ? other : other - 1;
                ClassRows &cr = rows[owner];
                const Eigen::RowVectorXd x = p.support_vectors.row(s);
                const std::string key = row_key(x);
                std::size_t target = cr.features.size();
                for (auto [lo, hi] = cr.lookup.equal_range(key); lo != hi; ++lo) {
                    if (cr.coef[lo->second][col] == 0.0) {
                        target = lo->second;
                        break;
                    }
                }
                if (target == cr.features.size()) {
                    cr.features.push_back(x);
                    cr.coef.emplace_back(k - 1, 0.0);
                    cr.lookup.emplace(key, target);
                }
                cr.coef[target][col] = c;
            }
        }
    }

    std::size_t total = 0;
    for (const auto &cr : rows) total += cr.features.size();
    out << "svm_type c_svc\n"
        << "kernel_type rbf\n"
        << "gamma " << detail::format_double(gamma) << '\n'
        << "nr_class " << k << '\n'
        << "total_sv " << total << '\n'
        << "rho";
    for (double r : rho) out << ' ' << detail::format_double(r);
    out << "\nlabel";
    for (int l : labels) out << ' ' << l;
    out << "\nnr_sv";
    for (const auto &cr : rows) out << ' ' << cr.features.size();
    out << "\nSV\n";
    std::string line;
    for (const auto &cr : rows) {
        for (std::size_t r = 0; r < cr.features.size(); ++r) {
            line.clear();
            for (double c : cr.coef[r]) {
                line += detail::format_double(c);
                line += ' ';
            }
            const auto &x = cr.features[r];
            for (Eigen::Index f = 0; f < x.size(); ++f) {
                if (x[f] != 0.0) line += fmt::format("{}:{} ", f + 1, detail::format_double(x[f]));
            }
            line += '\n';
            out << line;
        }
    }
}

void write_model(std::ostream &out, const SvmModel &m) { write_model(out, as_multiclass(m)); }

void write_model(std::ostream &out, const CompressedModel &m) { write_model(out, to_model(m)); }

std::string model_to_string(const MultiClassModel &m) {
    std::ostringstream os;
    write_model(os, m);
    return os.str();
}

std::string model_to_string(const SvmModel &m) { return model_to_string(as_multiclass(m)); }

void save_model(const std::string &path, const MultiClassModel &m) {
    const std::string text = model_to_string(m);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path));
    out << text;
    if (!out) throw DataError(fmt::format("write failed for '{}'", path));
}

void save_model(const std::string &path, const SvmModel &m) { save_model(path, as_multiclass(m)); }

namespace {

struct Header {
    std::optional<double> gamma;
    std::optional<std::size_t> nr_class;
    std::optional<std::size_t> total_sv;
    std::vector<double> rho;
    std::vector<int> label;
    std::vector<std::size_t> nr_sv;
    bool have_svm_type = false;
    bool have_kernel_type = false;
    bool have_rho = false;
};

template <typename T, typename Parse>
std::vector<T> parse_list(const std::vector<std::string_view> &tok, std::size_t line_no, Parse parse) {
    std::vector<T> out;
    for (std::size_t t = 1; t < tok.size(); ++t) {
        auto v = parse(tok[t]);
        if (!v) throw ParseError(line_no, fmt::format("invalid value '{}' for {}", tok[t], tok[0]));
        out.push_back(static_cast<T>(*v));
    }
    return out;
}

}  // namespace

MultiClassModel read_model(std::istream &in) {
    Header h;
    std::string line;
    std::size_t line_no = 0;
    bool in_sv = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        const std::string_view key = tok[0];
        if (key == "SV") {
            in_sv = true;
            break;
        }
        auto single = [&]() -> std::string_view {
            if (tok.size() != 2) throw ParseError(line_no, fmt::format("'{}' takes one value", key));
            return tok[1];
        };
        if (key == "svm_type") {
            if (single() != "c_svc") throw DataError(fmt::format("unsupported svm_type '{}'", tok[1]));
            h.have_svm_type = true;
        } else if (key == "kernel_type") {
            if (single() != "rbf") throw DataError(fmt::format("unsupported kernel_type '{}'", tok[1]));
            h.have_kernel_type = true;
        } else if (key == "gamma") {
            auto g = detail::parse_double(single());
            if (!g) throw ParseError(line_no, fmt::format("invalid gamma '{}'", tok[1]));
            h.gamma = *g;
        } else if (key == "nr_class") {
            h.nr_class = detail::parse_size(single());
            if (!h.nr_class || *h.nr_class < 2) throw ParseError(line_no, fmt::format("invalid nr_class '{}'", tok[1]));
        } else if (key == "total_sv") {
            h.total_sv = detail::parse_size(single());
            if (!h.total_sv) throw ParseError(line_no, fmt::format("invalid total_sv '{}'", tok[1]));
        } else if (key == "rho") {
            h.rho = parse_list<double>(tok, line_no, detail::parse_double);
            h.have_rho = true;
        } else if (key == "label") {
            h.label = parse_list<int>(tok, line_no, detail::parse_label);
        } else if (key == "nr_sv") {
            h.nr_sv = parse_list<std::size_t>(tok, line_no, detail::parse_size);
        } else if (key == "probA" || key == "probB" || key == "prob_density_marks") {
            // Probability calibration does not affect decision values.
        } else {
            throw ParseError(line_no, fmt::format("unknown header field '{}'", key));
        }
    }
    if (!in_sv) throw DataError("model file has no SV section");
    if (!h.have_svm_type || !h.have_kernel_type) throw DataError("model file lacks svm_type or kernel_type");
    if (!h.gamma || !h.nr_class || !h.total_sv || !h.have_rho) throw DataError("model file lacks gamma, nr_class, total_sv or rho");
    const std::size_t k = *h.nr_class;
    const std::size_t n_pairs = k * (k - 1) / 2;
    if (h.label.size() != k) throw DataError(fmt::format("label lists {} classes, nr_class is {}", h.label.size(), k));
    if (h.nr_sv.size() != k) throw DataError(fmt::format("nr_sv lists {} classes, nr_class is {}", h.nr_sv.size(), k));
    if (h.rho.size() != n_pairs) throw DataError(fmt::format("rho has {} values, expected {}", h.rho.size(), n_pairs));
    std::size_t sum = 0;
    for (auto c : h.nr_sv) sum += c;
    if (sum != *h.total_sv) throw DataError(fmt::format("nr_sv sums to {} but total_sv is {}", sum, *h.total_sv));
    {
        auto sorted = h.label;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw DataError("duplicate class label");
    }
    const KernelParams kernel = KernelParams::from_gamma(*h.gamma);

    struct SvLine {
        std::vector<double> coef;
        std::vector<std::pair<std::size_t, double>> features;
    };
    std::vector<SvLine> svs;
    svs.reserve(*h.total_sv);
    std::size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        if (svs.size() == *h.total_sv) throw ParseError(line_no, fmt::format("more than total_sv = {} support vectors", *h.total_sv));
        if (tok.size() < k - 1) throw ParseError(line_no, "support vector line has too few coefficients");
        SvLine sv;
        for (std::size_t c = 0; c + 1 < k; ++c) {
            auto v = detail::parse_double(tok[c]);
            if (!v || !std::isfinite(*v)) throw ParseError(line_no, fmt::format("invalid coefficient '{}'", tok[c]));
            sv.coef.push_back(*v);
        }
        std::size_t prev = 0;
        for (std::size_t t = k - 1; t < tok.size(); ++t) {
            auto e = detail::parse_index_value(tok[t]);
            if (!e) throw ParseError(line_no, fmt::format("malformed feature '{}'", tok[t]));
            if (e->first <= prev) throw ParseError(line_no, fmt::format("feature index {} is not strictly increasing", e->first));
            if (!std::isfinite(e->second)) throw ParseError(line_no, fmt::format("non-finite feature value '{}'", tok[t]));
            prev = e->first;
            sv.features.push_back(*e);
        }
        dim = std::max(dim, prev);
        svs.push_back(std::move(sv));
    }
    if (svs.size() != *h.total_sv)
        throw DataError(fmt::format("total_sv is {} but the file has {} support vectors", *h.total_sv, svs.size()));

    std::vector<std::size_t> start(k + 1, 0);
    for (std::size_t c = 0; c < k; ++c) start[c + 1] = start[c] + h.nr_sv[c];

    MultiClassModel out;
    out.classes = h.label;
    std::sort(out.classes.begin(), out.classes.end());
    std::size_t pair_index = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j, ++pair_index) {
            std::vector<std::pair<std::size_t, double>> members;  // (sv line, coefficient)
            for (std::size_t s = start[i]; s < start[i + 1]; ++s) {
                if (svs[s].coef[j - 1] != 0.0) members.emplace_back(s, svs[s].coef[j - 1]);
            }
            for (std::size_t s = start[j]; s < start[j + 1]; ++s) {
                if (svs[s].coef[i] != 0.0) members.emplace_back(s, svs[s].coef[i]);
            }
            if (members.empty()) throw DataError(fmt::format("classes {} and {} share no support vector", h.label[i], h.label[j]));
            SvmModel p;
            p.support_vectors = Matrix::Zero(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(dim));
            p.coef.resize(static_cast<Eigen::Index>(members.size()));
            for (std::size_t r = 0; r < members.size(); ++r) {
                for (auto [idx, v] : svs[members[r].first].features)
                    p.support_vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(idx - 1)) = v;
                p.coef[static_cast<Eigen::Index>(r)] = members[r].second;
            }
            p.bias = -h.rho[pair_index];
            p.kernel = kernel;
            p.class_pair = {h.label[j], h.label[i]};
            out.pairs.push_back(std::move(p));
        }
    }
    out.validate();
    return out;
}

MultiClassModel parse_model(const std::string &text) {
    std::istringstream in(text);
    return read_model(in);
}

MultiClassModel load_model(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path));
    return read_model(in);
}

const SvmModel &binary_model(const MultiClassModel &m) {
    if (m.classes.size() != 2 || m.pairs.size() != 1)
        throw UsageError(fmt::format("expected a two-class model, got {} classes", m.classes.size()));
    return m.pairs.front();
}

}  // namespace cvm
