// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cvm {

/// Row-major sample matrix: one row per sample.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Sample {
    Vector features;
    int label = 0;
};

/**
 * Labeled, dense feature vectors.
 *
 * Every row has the same length (dim) and contains only finite values;
 * classes() is the sorted set of labels that actually occur.
 */
class Dataset {
  public:
    Dataset() = default;
    /// Throws DataError on a row/label count mismatch or a non-finite entry.
    Dataset(Matrix features, std::vector<int> labels);
    static Dataset from_samples(const std::vector<Sample> &samples, std::optional<std::size_t> dim = std::nullopt);

    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] bool empty() const noexcept { return labels_.empty(); }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    [[nodiscard]] const Matrix &features() const noexcept { return features_; }
    [[nodiscard]] const std::vector<int> &labels() const noexcept { return labels_; }
    [[nodiscard]] const std::vector<int> &classes() const noexcept { return classes_; }
    [[nodiscard]] int label(std::size_t i) const { return labels_[i]; }
    [[nodiscard]] auto row(std::size_t i) const { return features_.row(static_cast<Eigen::Index>(i)); }
    [[nodiscard]] Sample sample(std::size_t i) const;

    /// Samples at the given positions, in that order.
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;
    /// Samples whose label is one of `keep`.
    [[nodiscard]] Dataset filter_classes(std::span<const int> keep) const;
    /// Zero-pads (or keeps) the feature dimension; shrinking is an error.
    [[nodiscard]] Dataset with_dim(std::size_t dim) const;

    bool operator==(const Dataset &other) const;

  private:
    Matrix features_;
    std::vector<int> labels_;
    std::vector<int> classes_;
};

/// Parses LibSVM sparse text (`label idx:val ...`, 1-based strictly increasing
/// indices). Blank lines and `#` comment lines are skipped, `\r\n` is accepted.
/// dim defaults to the largest index seen; an explicit dim must cover it.
Dataset parse_libsvm(std::istream &in, std::optional<std::size_t> dim = std::nullopt);
Dataset parse_libsvm(const std::string &text, std::optional<std::size_t> dim = std::nullopt);
Dataset load_libsvm(const std::string &path, std::optional<std::size_t> dim = std::nullopt);

/// Writes nonzero features with 17 significant digits, so parsing the output
/// reproduces the dataset exactly.
void write_libsvm(std::ostream &out, const Dataset &ds);
std::string to_libsvm(const Dataset &ds);
void save_libsvm(const std::string &path, const Dataset &ds);

struct SplitSpec {
    double validation_fraction = 0.2;
    std::uint64_t seed = 0;
};

/// Random train/validation partition; validation gets round(fraction * n)
/// samples. Both parts keep the input order.
std::pair<Dataset, Dataset> split(const Dataset &ds, const SplitSpec &spec);

/// Inner class (label -1): isotropic standard 2-d Gaussian. Outer class
/// (label +1): angle uniform on [0, 2pi), radius 4 + N(0, 0.3^2).
/// n/2 samples each; bit-deterministic per (n, seed).
Dataset generate_circle_synthetic(std::size_t n, std::uint64_t seed);

/// Per-feature affine map x -> (x - mean) / scale.
struct Standardization {
    Vector mean;
    Vector scale;  ///< population std, or 1 for constant features

    [[nodiscard]] Dataset apply(const Dataset &ds) const;
    void save(const std::string &path) const;
    static Standardization load(const std::string &path);
};

/// Fits the map on `train` (which must be nonempty).
Standardization fit_standardization(const Dataset &train);

struct StandardizedData {
    Dataset train;
    std::vector<Dataset> others;
    Standardization map;
};

/// Standardizes train and applies the same map to every dataset in `others`.
StandardizedData standardize(const Dataset &train, std::span<const Dataset> others = {});

}  // namespace cvm
