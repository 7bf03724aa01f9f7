// SPDX-License-Identifier: Apache-2.0
#include "data.hpp"

#include "error.hpp"
#include "text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace cvm {

Dataset::Dataset(Matrix features, std::vector<int> labels) : features_(std::move(features)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
        throw DataError(fmt::format("dataset has {} feature rows but {} labels", features_.rows(), labels_.size()));
    }
    if (!features_.allFinite()) throw DataError("dataset contains non-finite feature values");
    std::set<int> distinct(labels_.begin(), labels_.end());
    classes_.assign(distinct.begin(), distinct.end());
}

Dataset Dataset::from_samples(const std::vector<Sample> &samples, std::optional<std::size_t> dim) {
    std::size_t d = dim.value_or(samples.empty() ? 0 : static_cast<std::size_t>(samples.front().features.size()));
    Matrix x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(d));
    std::vector<int> labels;
    labels.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<std::size_t>(samples[i].features.size()) != d) {
            throw DataError(fmt::format("sample {} has {} features, expected {}", i, samples[i].features.size(), d));
        }
        x.row(static_cast<Eigen::Index>(i)) = samples[i].features.transpose();
        labels.push_back(samples[i].label);
    }
    return Dataset(std::move(x), std::move(labels));
}

Sample Dataset::sample(std::size_t i) const { return Sample{row(i).transpose(), labels_[i]}; }

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Matrix x(static_cast<Eigen::Index>(indices.size()), features_.cols());
    std::vector<int> labels;
    labels.reserve(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        x.row(static_cast<Eigen::Index>(k)) = row(indices[k]);
        labels.push_back(labels_[indices[k]]);
    }
    return Dataset(std::move(x), std::move(labels));
}

Dataset Dataset::filter_classes(std::span<const int> keep) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < size(); ++i) {
        if (std::find(keep.begin(), keep.end(), labels_[i]) != keep.end()) idx.push_back(i);
    }
    return subset(idx);
}

Dataset Dataset::with_dim(std::size_t d) const {
    if (d < dim()) throw UsageError(fmt::format("cannot shrink dataset dimension from {} to {}", dim(), d));
    if (d == dim()) return *this;
    Matrix x = Matrix::Zero(features_.rows(), static_cast<Eigen::Index>(d));
    x.leftCols(features_.cols()) = features_;
    return Dataset(std::move(x), labels_);
}

bool Dataset::operator==(const Dataset &other) const {
    return labels_ == other.labels_ && features_.rows() == other.features_.rows() &&
           features_.cols() == other.features_.cols() && features_ == other.features_;
}

Dataset parse_libsvm(std::istream &in, std::optional<std::size_t> dim) {
    struct Row {
        std::vector<std::pair<std::size_t, double>> entries;
        int label;
    };
    std::vector<Row> rows;
    std::size_t max_index = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto tokens = detail::split_ws(line);
        if (tokens.empty() || tokens.front().front() == '#') continue;

        Row r;
        auto label = detail::parse_label(tokens.front());
        if (!label) throw ParseError(line_no, fmt::format("invalid label '{}'", tokens.front()));
        r.label = *label;
        std::size_t prev = 0;
        for (std::size_t t = 1; t < tokens.size(); ++t) {
            auto entry = detail::parse_index_value(tokens[t]);
            if (!entry) throw ParseError(line_no, fmt::format("malformed feature '{}'", tokens[t]));
            auto [index, value] = *entry;
            if (index <= prev) throw ParseError(line_no, fmt::format("feature index {} is not strictly increasing", index));
            if (!std::isfinite(value)) throw ParseError(line_no, fmt::format("non-finite feature value '{}'", tokens[t]));
            prev = index;
            r.entries.emplace_back(index, value);
        }
        max_index = std::max(max_index, prev);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw DataError("no samples in LibSVM input");
    if (dim && *dim < max_index) throw DataError(fmt::format("feature index {} exceeds dimension {}", max_index, *dim));

    const std::size_t d = dim.value_or(max_index);
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    std::vector<int> labels;
    labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (auto [index, value] : rows[i].entries) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index - 1)) = value;
        labels.push_back(rows[i].label);
    }
    return Dataset(std::move(x), std::move(labels));
}

Dataset parse_libsvm(const std::string &text, std::optional<std::size_t> dim) {
    std::istringstream in(text);
    return parse_libsvm(in, dim);
}

Dataset load_libsvm(const std::string &path, std::optional<std::size_t> dim) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path));
    try {
        return parse_libsvm(in, dim);
    } catch (const ParseError &e) {
        throw DataError(fmt::format("{}: {}", path, e.what()));
    }
}

void write_libsvm(std::ostream &out, const Dataset &ds) {
    std::string line;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        line = fmt::format("{}", ds.label(i));
        auto r = ds.row(i);
        for (Eigen::Index j = 0; j < r.size(); ++j) {
            if (r(j) != 0.0) line += fmt::format(" {}:{}", j + 1, detail::format_double(r(j)));
        }
        line += '\n';
        out << line;
    }
}

std::string to_libsvm(const Dataset &ds) {
    std::ostringstream out;
    write_libsvm(out, ds);
    return out.str();
}

void save_libsvm(const std::string &path, const Dataset &ds) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path));
    write_libsvm(out, ds);
    if (!out) throw DataError(fmt::format("write failed for '{}'", path));
}

std::pair<Dataset, Dataset> split(const Dataset &ds, const SplitSpec &spec) {
    if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0)) {
        throw UsageError(fmt::format("validation fraction {} outside (0, 1)", spec.validation_fraction));
    }
    const std::size_t n = ds.size();
    if (n < 2) throw UsageError("split needs at least 2 samples");
    const auto n_val = static_cast<std::size_t>(std::llround(spec.validation_fraction * static_cast<double>(n)));
    if (n_val == 0 || n_val == n) {
        throw UsageError(fmt::format("validation fraction {} leaves an empty part for n = {}", spec.validation_fraction, n));
    }

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(spec.seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng() % (i + 1)]);

    std::vector<std::size_t> val(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
    std::sort(val.begin(), val.end());
    std::sort(train.begin(), train.end());
    return {ds.subset(train), ds.subset(val)};
}

namespace {

// Portable generators so the synthetic set does not depend on the standard
// library's distribution implementations.
double uniform01(std::mt19937_64 &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64 &rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Dataset generate_circle_synthetic(std::size_t n, std::uint64_t seed) {
    if (n < 2 || n % 2 != 0) throw UsageError(fmt::format("synthetic sample count must be even and >= 2, got {}", n));
    constexpr double outer_radius = 4.0;
    constexpr double radial_noise = 0.3;

    std::mt19937_64 rng(seed);
    Matrix x(static_cast<Eigen::Index>(n), 2);
    std::vector<int> labels(n);
    const std::size_t half = n / 2;
    for (std::size_t i = 0; i < half; ++i) {
        const double a = standard_normal(rng);
        const double b = standard_normal(rng);
        x.row(static_cast<Eigen::Index>(i)) << a, b;
        labels[i] = -1;
    }
    for (std::size_t i = half; i < n; ++i) {
        const double angle = 2.0 * std::numbers::pi * uniform01(rng);
        const double r = outer_radius + radial_noise * standard_normal(rng);
        x.row(static_cast<Eigen::Index>(i)) << r * std::cos(angle), r * std::sin(angle);
        labels[i] = +1;
    }
    return Dataset(std::move(x), std::move(labels));
}

Standardization fit_standardization(const Dataset &train) {
    if (train.empty()) throw UsageError("cannot standardize an empty dataset");
    const auto &x = train.features();
    Standardization s;
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double var = (x.col(j).array() - s.mean(j)).square().mean();
        const double sd = std::sqrt(var);
        s.scale(j) = sd > 1e-12 * (1.0 + std::abs(s.mean(j))) ? sd : 1.0;
    }
    return s;
}

Dataset Standardization::apply(const Dataset &ds) const {
    if (static_cast<Eigen::Index>(ds.dim()) != mean.size()) {
        throw UsageError(fmt::format("standardization fitted for {} features, dataset has {}", mean.size(), ds.dim()));
    }
    Matrix x = ds.features();
    for (Eigen::Index j = 0; j < x.cols(); ++j) x.col(j) = (x.col(j).array() - mean(j)) / scale(j);
    return Dataset(std::move(x), ds.labels());
}

void Standardization::save(const std::string &path) const {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path));
    for (Eigen::Index j = 0; j < mean.size(); ++j) {
        out << fmt::format("{} {} {}\n", j + 1, detail::format_double(mean(j)), detail::format_double(scale(j)));
    }
}

Standardization Standardization::load(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path));
    std::vector<double> means, scales;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = detail::split_ws(line);
        if (tokens.empty()) continue;
        std::optional<double> m, s;
        if (tokens.size() == 3) {
            m = detail::parse_double(tokens[1]);
            s = detail::parse_double(tokens[2]);
        }
        if (!m || !s || *s <= 0.0 || detail::parse_size(tokens[0]) != means.size() + 1) {
            throw ParseError(line_no, fmt::format("malformed standardization entry in '{}'", path));
        }
        means.push_back(*m);
        scales.push_back(*s);
    }
    Standardization st;
    st.mean = Eigen::Map<Vector>(means.data(), static_cast<Eigen::Index>(means.size()));
    st.scale = Eigen::Map<Vector>(scales.data(), static_cast<Eigen::Index>(scales.size()));
    return st;
}

StandardizedData standardize(const Dataset &train, std::span<const Dataset> others) {
    StandardizedData out;
    out.map = fit_standardization(train);
    out.train = out.map.apply(train);
    for (const auto &ds : others) out.others.push_back(out.map.apply(ds));
    return out;
}

}  // namespace cvm
