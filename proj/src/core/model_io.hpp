// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsv.hpp"
#include "svm.hpp"

#include <iosfwd>
#include <string>

namespace cvm {

/**
 * LibSVM model files (svm_type c_svc, kernel_type rbf).
 *
 * gamma = 1 / (2 sigma^2) and rho = -bias. Binary files list the positive
 * class first; multi-class files list labels in descending order and use the
 * one-vs-one coefficient layout, one column per opposing class. Support
 * vectors shared between pairs are stored once when their features match
 * exactly; a pair's remaining entries in other columns are zero.
 */
void write_model(std::ostream &out, const MultiClassModel &m);
void write_model(std::ostream &out, const SvmModel &m);
void write_model(std::ostream &out, const CompressedModel &m);
std::string model_to_string(const MultiClassModel &m);
std::string model_to_string(const SvmModel &m);
void save_model(const std::string &path, const MultiClassModel &m);
void save_model(const std::string &path, const SvmModel &m);

/// Always an ensemble; binary files give a single pair. Unsupported svm or
/// kernel types and count mismatches throw DataError (ParseError with a line
/// number where one applies).
MultiClassModel read_model(std::istream &in);
MultiClassModel parse_model(const std::string &text);
MultiClassModel load_model(const std::string &path);

/// The single pair of a two-class ensemble; UsageError otherwise.
const SvmModel &binary_model(const MultiClassModel &m);

}  // namespace cvm
