#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace vexmg::linalg {

using Vector = std::vector<double>;

/// Column-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);
    /// Builds from row-major nested initialiser data (convenient in tests).
    static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[j * rows_ + i]; }

    [[nodiscard]] std::span<double> col(std::size_t j) noexcept { return {values_.data() + j * rows_, rows_}; }
    [[nodiscard]] std::span<const double> col(std::size_t j) const noexcept {
        return {values_.data() + j * rows_, rows_};
    }

    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    void append_column(std::span<const double> column);
    /// Keeps columns [first, first + count).
    [[nodiscard]] DenseMatrix column_block(std::size_t first, std::size_t count) const;
    [[nodiscard]] DenseMatrix transpose() const;

    [[nodiscard]] Vector multiply(std::span<const double> x) const;
    [[nodiscard]] Vector multiply_transpose(std::span<const double> x) const;
    [[nodiscard]] DenseMatrix multiply(const DenseMatrix& other) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b) noexcept;
[[nodiscard]] double norm2(std::span<const double> a) noexcept;
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;
[[nodiscard]] Vector subtract(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double frobenius_norm(const DenseMatrix& m) noexcept;

/// R[i,i] <= kRankDropTolerance * R[0,0] marks a column as linearly dependent.
inline constexpr double kRankDropTolerance = 1e-13;

struct QRFactors {
    DenseMatrix q; ///< rows x k, orthonormal columns
    DenseMatrix r; ///< k x k upper triangular, positive diagonal
};

/// Modified Gram-Schmidt QR with one reorthogonalisation pass that accepts
/// columns one at a time.
///
/// A column whose orthogonal remainder falls under the drop tolerance is
/// rejected: `append` returns false and the projection coefficients of the
/// rejected column stay available through `rejected_coefficients()` so that
/// callers can still use the linear dependence it exposes.
class IncrementalQR {
public:
    explicit IncrementalQR(std::size_t rows) : rows_(rows), q_(rows, 0) {}

    bool append(std::span<const double> column);
    /// Removes the oldest column and refactors the remaining ones.
    void drop_first();

    [[nodiscard]] std::size_t rank() const noexcept { return q_.cols(); }
    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] const DenseMatrix& q() const noexcept { return q_; }
    /// Square upper-triangular factor of the accepted columns.
    [[nodiscard]] DenseMatrix r() const;
    [[nodiscard]] double r_at(std::size_t i, std::size_t j) const { return r_cols_[j][i]; }

    /// Coefficients Q^T a of the last rejected column (length rank()).
    [[nodiscard]] const Vector& rejected_coefficients() const noexcept { return rejected_coeffs_; }
    [[nodiscard]] double rejected_remainder() const noexcept { return rejected_remainder_; }

    /// Solves min ||b - A x|| over the accepted columns.
    [[nodiscard]] Vector least_squares(std::span<const double> b) const;

private:
    std::size_t rows_;
    DenseMatrix q_;
    std::vector<Vector> r_cols_;
    std::vector<Vector> columns_; // original columns, needed by drop_first
    Vector rejected_coeffs_;
    double rejected_remainder_ = 0.0;
};

/// Thin QR factorisation. Throws RankDeficient{column} on the first column
/// whose diagonal falls below the drop tolerance.
[[nodiscard]] QRFactors qr_factor(const DenseMatrix& m);

/// Back substitution. Throws SingularTriangular{index}.
[[nodiscard]] Vector solve_upper_triangular(const DenseMatrix& r, std::span<const double> b);
/// Forward substitution with R^T (R upper triangular). Throws SingularTriangular{index}.
[[nodiscard]] Vector solve_lower_transposed(const DenseMatrix& r, std::span<const double> b);
/// Solves R^T R d = rhs with two triangular solves.
[[nodiscard]] Vector solve_normal_equations(const DenseMatrix& r, std::span<const double> rhs);

/// LU factorisation with partial pivoting, kept for repeated solves.
class DenseLU {
public:
    DenseLU() = default;
    explicit DenseLU(DenseMatrix a);

    [[nodiscard]] Vector solve(std::span<const double> b) const;
    [[nodiscard]] std::size_t size() const noexcept { return lu_.rows(); }

private:
    DenseMatrix lu_;
    std::vector<std::size_t> pivots_;
};

/// Throws SingularMatrix.
[[nodiscard]] Vector lu_solve_dense(const DenseMatrix& a, std::span<const double> b);

} // namespace vexmg::linalg
