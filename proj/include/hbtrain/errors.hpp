#pragma once

#include <stdexcept>
#include <string>

namespace hbtrain {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A scalar or dimension argument violates its documented precondition.
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// A correlation matrix has an eigenvalue below the full-rank floor.
class RankDeficientError : public Error {
 public:
  RankDeficientError(const std::string& side, int index, double value)
      : Error("rank-deficient correlation: " + side + " eigenvalue " +
              std::to_string(index) + " = " + std::to_string(value) +
              " below floor 1e-12"),
        side_(side),
        index_(index) {}
  const std::string& side() const { return side_; }
  int index() const { return index_; }

 private:
  std::string side_;
  int index_;
};

/// An iterative solver failed to converge or a matrix was numerically singular.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg, double residual = 0.0)
      : Error(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Matrix operands have inconsistent shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Configuration text could not be parsed; carries key and line context.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, const std::string& key, int line)
      : Error("parse error (key '" + key + "', line " + std::to_string(line) +
              "): " + msg),
        key_(key),
        line_(line) {}
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

/// File could not be read or written; message includes the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hbtrain
