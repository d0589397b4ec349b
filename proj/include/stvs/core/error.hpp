#pragma once

#include <stdexcept>
#include <string>

namespace stvs {

/// Base of every error the library throws.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document; `where()` carries the line/field locus.
class ParseError : public Error {
  public:
    ParseError(std::string where, const std::string& what)
        : Error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const noexcept { return where_; }

  private:
    std::string where_;
};

/// A domain invariant does not hold.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Bad argument to an operation (out-of-range step, empty input, ...).
class ArgumentError : public Error {
  public:
    using Error::Error;
};

class SingularMatrixError : public Error {
  public:
    using Error::Error;
};

/// Iterative solver failed; carries the final mismatch and iteration count.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& what, double mismatch, int iterations)
        : Error(what + " (mismatch " + std::to_string(mismatch) + " after " +
                std::to_string(iterations) + " iterations)"),
          mismatch_(mismatch), iterations_(iterations) {}
    double mismatch() const noexcept { return mismatch_; }
    int iterations() const noexcept { return iterations_; }

  private:
    double mismatch_;
    int iterations_;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace stvs
