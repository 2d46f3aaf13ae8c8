#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sforge {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    /// Short machine-readable identifier, e.g. "SingularIB".
    [[nodiscard]] virtual const char* kind() const noexcept = 0;
};

/// Malformed or out-of-contract input. The CLI maps these to exit code 1.
class InputError : public Error {
public:
    using Error::Error;
};

/// A numerical procedure could not deliver its postcondition. Exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

#define SFORGE_ERROR_KIND(Name) \
    [[nodiscard]] const char* kind() const noexcept override { return #Name; }

class InvalidArgument : public InputError {
public:
    using InputError::InputError;
    SFORGE_ERROR_KIND(InvalidArgument)
};

// Factor and column indices are 1-based, as they appear in b_k^j.
class ZeroWeight : public InputError {
public:
    ZeroWeight(std::size_t factor, std::size_t column)
        : InputError("weight b[j=" + std::to_string(factor) + "][k=" + std::to_string(column) +
                     "] is zero"),
          factor_(factor), column_(column) {}
    [[nodiscard]] std::size_t factor() const noexcept { return factor_; }
    [[nodiscard]] std::size_t column() const noexcept { return column_; }
    SFORGE_ERROR_KIND(ZeroWeight)

private:
    std::size_t factor_;
    std::size_t column_;
};

class BadIndex : public InputError {
public:
    using InputError::InputError;
    SFORGE_ERROR_KIND(BadIndex)
};

class BadParity : public InputError {
public:
    using InputError::InputError;
    SFORGE_ERROR_KIND(BadParity)
};

class BudgetExceeded : public InputError {
public:
    using InputError::InputError;
    SFORGE_ERROR_KIND(BudgetExceeded)
};

class SingularIB : public NumericError {
public:
    explicit SingularIB(double det)
        : NumericError("sign/weight matrix is singular (det = " + std::to_string(det) + ")"),
          det_(det) {}
    [[nodiscard]] double det() const noexcept { return det_; }
    SFORGE_ERROR_KIND(SingularIB)

private:
    double det_;
};

class SingularB : public NumericError {
public:
    explicit SingularB(double det)
        : NumericError("leading-weight matrix B is singular (det = " + std::to_string(det) + ")"),
          det_(det) {}
    [[nodiscard]] double det() const noexcept { return det_; }
    SFORGE_ERROR_KIND(SingularB)

private:
    double det_;
};

// 1-based column index.
class ZeroAmplitude : public NumericError {
public:
    ZeroAmplitude(std::size_t column, double value)
        : NumericError("base amplitude a[" + std::to_string(column) + "] = " +
                       std::to_string(value) +
                       " vanishes; frequencies look rationally dependent"),
          column_(column), value_(value) {}
    [[nodiscard]] std::size_t column() const noexcept { return column_; }
    [[nodiscard]] double value() const noexcept { return value_; }
    SFORGE_ERROR_KIND(ZeroAmplitude)

private:
    std::size_t column_;
    double value_;
};

// 1-based delay index.
class SearchExhausted : public NumericError {
public:
    SearchExhausted(std::size_t delay, double best_distance)
        : NumericError("delay search for tau[" + std::to_string(delay) +
                       "] exhausted its budget (best angular distance " +
                       std::to_string(best_distance) + " rad)"),
          delay_(delay), best_(best_distance) {}
    [[nodiscard]] std::size_t delay() const noexcept { return delay_; }
    [[nodiscard]] double best_distance() const noexcept { return best_; }
    SFORGE_ERROR_KIND(SearchExhausted)

private:
    std::size_t delay_;
    double best_;
};

class NoConvergence : public NumericError {
public:
    NoConvergence(const std::string& what, double residual)
        : NumericError(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    [[nodiscard]] double residual() const noexcept { return residual_; }
    SFORGE_ERROR_KIND(NoConvergence)

private:
    double residual_;
};

class LeftDomain : public NumericError {
public:
    using NumericError::NumericError;
    SFORGE_ERROR_KIND(LeftDomain)
};

class SingularJacobian : public NumericError {
public:
    using NumericError::NumericError;
    SFORGE_ERROR_KIND(SingularJacobian)
};

class BoundaryRoot : public NumericError {
public:
    using NumericError::NumericError;
    SFORGE_ERROR_KIND(BoundaryRoot)
};

class TooManyRoots : public NumericError {
public:
    TooManyRoots(int count, int limit)
        : NumericError("region holds " + std::to_string(count) + " roots, limit is " +
                       std::to_string(limit)),
          count_(count) {}
    [[nodiscard]] int count() const noexcept { return count_; }
    SFORGE_ERROR_KIND(TooManyRoots)

private:
    int count_;
};

#undef SFORGE_ERROR_KIND

}  // namespace sforge
