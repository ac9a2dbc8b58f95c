#include "vexmg/linalg/dense.hpp"

#include "vexmg/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <utility>

namespace vexmg::linalg {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t nr = rows.size();
    const std::size_t nc = nr == 0 ? 0 : rows.front().size();
    DenseMatrix m(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
        assert(rows[i].size() == nc);
        for (std::size_t j = 0; j < nc; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

void DenseMatrix::append_column(std::span<const double> column) {
    assert(column.size() == rows_);
    values_.insert(values_.end(), column.begin(), column.end());
    ++cols_;
}

DenseMatrix DenseMatrix::column_block(std::size_t first, std::size_t count) const {
    assert(first + count <= cols_);
    DenseMatrix out(rows_, count);
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(first * rows_), count * rows_, out.values_.begin());
    return out;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
}

Vector DenseMatrix::multiply(std::span<const double> x) const {
    assert(x.size() == cols_);
    Vector y(rows_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) axpy(x[j], col(j), y);
    return y;
}

Vector DenseMatrix::multiply_transpose(std::span<const double> x) const {
    assert(x.size() == rows_);
    Vector y(cols_);
    for (std::size_t j = 0; j < cols_; ++j) y[j] = dot(col(j), x);
    return y;
}

DenseMatrix DenseMatrix::multiply(const DenseMatrix& other) const {
    assert(cols_ == other.rows());
    DenseMatrix out(rows_, other.cols());
    for (std::size_t j = 0; j < other.cols(); ++j)
        for (std::size_t k = 0; k < cols_; ++k) axpy(other(k, j), col(k), out.col(j));
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    assert(a.size() == b.size());
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) noexcept {
    // scaled to avoid overflow on diverging iterates
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double sum = 0.0;
    for (double v : a) {
        const double s = v / scale;
        sum += s * s;
    }
    return scale * std::sqrt(sum);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

double frobenius_norm(const DenseMatrix& m) noexcept { return norm2(m.values()); }

// ---------------------------------------------------------------------------
// QR

bool IncrementalQR::append(std::span<const double> column) {
    assert(column.size() == rows_);
    const std::size_t k = q_.cols();
    Vector v(column.begin(), column.end());
    Vector coeffs(k, 0.0);
    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < k; ++i) {
            const double c = dot(q_.col(i), v);
            coeffs[i] += c;
            axpy(-c, q_.col(i), v);
        }
    }
    const double remainder = norm2(v);
    const double reference = k == 0 ? norm2(column) : r_cols_.front().front();
    const bool dependent = k == 0 ? remainder == 0.0 : remainder <= kRankDropTolerance * reference;
    if (dependent) {
        rejected_coeffs_ = std::move(coeffs);
        rejected_remainder_ = remainder;
        return false;
    }
    for (double& x : v) x /= remainder;
    q_.append_column(v);
    coeffs.push_back(remainder);
    r_cols_.push_back(std::move(coeffs));
    columns_.emplace_back(column.begin(), column.end());
    return true;
}

void IncrementalQR::drop_first() {
    if (columns_.empty()) return;
    std::vector<Vector> remaining(std::make_move_iterator(columns_.begin() + 1),
                                  std::make_move_iterator(columns_.end()));
    q_ = DenseMatrix(rows_, 0);
    r_cols_.clear();
    columns_.clear();
    for (const auto& c : remaining) append(c);
}

DenseMatrix IncrementalQR::r() const {
    const std::size_t k = r_cols_.size();
    DenseMatrix r(k, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i <= j; ++i) r(i, j) = r_cols_[j][i];
    return r;
}

Vector IncrementalQR::least_squares(std::span<const double> b) const {
    return solve_upper_triangular(r(), q_.multiply_transpose(b));
}

QRFactors qr_factor(const DenseMatrix& m) {
    IncrementalQR qr(m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j)
        if (!qr.append(m.col(j))) throw RankDeficient(j);
    return {qr.q(), qr.r()};
}

namespace {

double diagonal_tolerance(const DenseMatrix& r) {
    double largest = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i) largest = std::max(largest, std::abs(r(i, i)));
    return kRankDropTolerance * largest;
}

} // namespace

Vector solve_upper_triangular(const DenseMatrix& r, std::span<const double> b) {
    const std::size_t n = r.rows();
    assert(r.cols() == n && b.size() == n);
    const double tol = diagonal_tolerance(r);
    Vector x(b.begin(), b.end());
    for (std::size_t ii = n; ii-- > 0;) {
        const double d = r(ii, ii);
        if (d == 0.0 || std::abs(d) <= tol) throw SingularTriangular(ii);
        for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= r(ii, j) * x[j];
        x[ii] /= d;
    }
    return x;
}

Vector solve_lower_transposed(const DenseMatrix& r, std::span<const double> b) {
    const std::size_t n = r.rows();
    assert(r.cols() == n && b.size() == n);
    const double tol = diagonal_tolerance(r);
    Vector x(b.begin(), b.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double d = r(i, i);
        if (d == 0.0 || std::abs(d) <= tol) throw SingularTriangular(i);
        for (std::size_t j = 0; j < i; ++j) x[i] -= r(j, i) * x[j];
        x[i] /= d;
    }
    return x;
}

Vector solve_normal_equations(const DenseMatrix& r, std::span<const double> rhs) {
    const Vector y = solve_lower_transposed(r, rhs);
    return solve_upper_triangular(r, y);
}

// ---------------------------------------------------------------------------
// LU

DenseLU::DenseLU(DenseMatrix a) : lu_(std::move(a)), pivots_(lu_.rows()) {
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw SingularMatrix("LU requires a square matrix");
    double scale = 0.0;
    for (double v : lu_.values()) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu_(i, k)) > std::abs(lu_(piv, k))) piv = i;
        if (lu_(piv, k) == 0.0 || std::abs(lu_(piv, k)) <= 1e-15 * scale)
            throw SingularMatrix("zero pivot in column " + std::to_string(k));
        pivots_[k] = piv;
        if (piv != k)
            for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
        const double inv = 1.0 / lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) lu_(i, k) *= inv;
        for (std::size_t j = k + 1; j < n; ++j) {
            const double ukj = lu_(k, j);
            if (ukj == 0.0) continue;
            for (std::size_t i = k + 1; i < n; ++i) lu_(i, j) -= lu_(i, k) * ukj;
        }
    }
}

Vector DenseLU::solve(std::span<const double> b) const {
    const std::size_t n = lu_.rows();
    assert(b.size() == n);
    Vector x(b.begin(), b.end());
    for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[pivots_[k]]);
    for (std::size_t j = 0; j < n; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        for (std::size_t i = j + 1; i < n; ++i) x[i] -= lu_(i, j) * xj;
    }
    for (std::size_t j = n; j-- > 0;) {
        x[j] /= lu_(j, j);
        const double xj = x[j];
        for (std::size_t i = 0; i < j; ++i) x[i] -= lu_(i, j) * xj;
    }
    return x;
}

Vector lu_solve_dense(const DenseMatrix& a, std::span<const double> b) { return DenseLU(a).solve(b); }

} // namespace vexmg::linalg
