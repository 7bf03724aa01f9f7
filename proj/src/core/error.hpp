// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace cvm {

/// Broad failure class; maps onto CLI exit codes and C API status codes.
enum class ErrorKind {
    usage = 1,      ///< invalid argument or precondition
    data = 2,       ///< malformed input file or dataset
    numerical = 3,  ///< solver breakdown or non-finite values
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

class UsageError : public Error {
  public:
    explicit UsageError(const std::string &what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
  public:
    explicit DataError(const std::string &what) : Error(ErrorKind::data, what) {}
};

/// Thrown by the parsers; carries the 1-based line number of the offending line.
class ParseError : public DataError {
  public:
    ParseError(std::size_t line, const std::string &what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

class NumericalError : public Error {
  public:
    explicit NumericalError(const std::string &what) : Error(ErrorKind::numerical, what) {}
};

}  // namespace cvm
