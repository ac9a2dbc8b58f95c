#pragma once

#include "vexmg/linalg/dense.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace vexmg::linalg {

/// Compressed-row sparse matrix. Immutable once built.
class SparseMatrix {
public:
    struct Triplet {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

    /// Sums duplicate (row, col) pairs and sorts columns within each row.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static SparseMatrix from_dense(const DenseMatrix& d, double drop = 0.0);
    static SparseMatrix identity(std::size_t n);
    /// Adopts compressed-row arrays; columns must be sorted and unique per row.
    static SparseMatrix from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                 std::vector<std::size_t> col_idx, std::vector<double> values);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }

    [[nodiscard]] const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    [[nodiscard]] const std::vector<std::size_t>& col_idx() const noexcept { return col_idx_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    /// Entry lookup by binary search; zero when not stored.
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;

    [[nodiscard]] Vector multiply(std::span<const double> x) const;
    void multiply_into(std::span<const double> x, std::span<double> y) const;
    /// y = b - A x
    void residual_into(std::span<const double> b, std::span<const double> x, std::span<double> y) const;

    [[nodiscard]] SparseMatrix transpose() const;
    [[nodiscard]] Vector diagonal() const;
    [[nodiscard]] DenseMatrix to_dense() const;
    [[nodiscard]] double max_abs() const noexcept;

    /// Rows and columns selected by index lists, in the given order.
    [[nodiscard]] SparseMatrix submatrix(std::span<const std::size_t> row_ids,
                                         std::span<const std::size_t> col_ids) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

[[nodiscard]] SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);
/// P^T A P
[[nodiscard]] SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a);
[[nodiscard]] SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double beta = 1.0);
/// Kronecker product with row index i_a * b.rows() + i_b.
[[nodiscard]] SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);

/// max |A_ij - A_ji| over stored pairs, relative to max |A|.
[[nodiscard]] double symmetry_defect(const SparseMatrix& a);

struct CgResult {
    Vector x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
[[nodiscard]] CgResult conjugate_gradient(const SparseMatrix& a, std::span<const double> b, double tol = 1e-14,
                                          std::size_t maxiter = 10000);

} // namespace vexmg::linalg
