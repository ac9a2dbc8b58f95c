#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vexmg {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RankDeficient : public Error {
public:
    explicit RankDeficient(std::size_t column)
        : Error("rank-deficient column " + std::to_string(column)), column_(column) {}
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class SingularTriangular : public Error {
public:
    explicit SingularTriangular(std::size_t index)
        : Error("singular triangular factor at diagonal " + std::to_string(index)), index_(index) {}
    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class ZeroDiagonal : public Error {
public:
    explicit ZeroDiagonal(std::size_t row)
        : Error("zero diagonal in row " + std::to_string(row)), row_(row) {}
    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class InvalidInterval : public Error {
public:
    using Error::Error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

class UnsupportedOrder : public Error {
public:
    using Error::Error;
};

class TooCoarse : public Error {
public:
    using Error::Error;
};

class DegreeTooLow : public Error {
public:
    using Error::Error;
};

/// exp(u) would overflow while assembling a load vector.
class Overflow : public Error {
public:
    using Error::Error;
};

/// The polynomial-extrapolation normaliser sum(d) vanished.
class ZeroDenominator : public Error {
public:
    using Error::Error;
};

class Diverged : public Error {
public:
    using Error::Error;
};

class MaxIterExceeded : public Error {
public:
    MaxIterExceeded(std::size_t iterations, double final_residual)
        : Error("maximum iterations (" + std::to_string(iterations) + ") exceeded, residual " +
                std::to_string(final_residual)),
          iterations_(iterations), final_residual_(final_residual) {}
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }
    [[nodiscard]] double final_residual() const noexcept { return final_residual_; }

private:
    std::size_t iterations_;
    double final_residual_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace vexmg
