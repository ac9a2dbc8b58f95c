#include "vexmg/linalg/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace vexmg::linalg {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(rows, cols);
    m.col_idx_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size();) {
        const auto [r, c, v0] = triplets[k];
        assert(r < rows && c < cols);
        double v = v0;
        std::size_t next = k + 1;
        while (next < triplets.size() && triplets[next].row == r && triplets[next].col == c) v += triplets[next++].value;
        m.col_idx_.push_back(c);
        m.values_.push_back(v);
        ++m.row_ptr_[r + 1];
        k = next;
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
    return m;
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& d, double drop) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
            if (std::abs(d(i, j)) > drop) t.push_back({i, j, d(i, j)});
    return from_triplets(d.rows(), d.cols(), std::move(t));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                    std::vector<std::size_t> col_idx, std::vector<double> values) {
    assert(row_ptr.size() == rows + 1 && col_idx.size() == values.size() && row_ptr.back() == values.size());
    SparseMatrix m(rows, cols);
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    return m;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector SparseMatrix::multiply(std::span<const double> x) const {
    Vector y(rows_);
    multiply_into(x, y);
    return y;
}

void SparseMatrix::multiply_into(std::span<const double> x, std::span<double> y) const {
    assert(x.size() == cols_ && y.size() == rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
        y[i] = s;
    }
}

void SparseMatrix::residual_into(std::span<const double> b, std::span<const double> x, std::span<double> y) const {
    assert(b.size() == rows_ && x.size() == cols_ && y.size() == rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = b[i];
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s -= values_[k] * x[col_idx_[k]];
        y[i] = s;
    }
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix t(cols_, rows_);
    t.col_idx_.resize(values_.size());
    t.values_.resize(values_.size());
    for (std::size_t c : col_idx_) ++t.row_ptr_[c + 1];
    for (std::size_t i = 0; i < cols_; ++i) t.row_ptr_[i + 1] += t.row_ptr_[i];
    std::vector<std::size_t> fill(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t dst = fill[col_idx_[k]]++;
            t.col_idx_[dst] = i;
            t.values_[dst] = values_[k];
        }
    }
    return t;
}

Vector SparseMatrix::diagonal() const {
    Vector d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) += values_[k];
    return d;
}

double SparseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

SparseMatrix SparseMatrix::submatrix(std::span<const std::size_t> row_ids, std::span<const std::size_t> col_ids) const {
    constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);
    std::vector<std::size_t> col_map(cols_, kAbsent);
    for (std::size_t j = 0; j < col_ids.size(); ++j) col_map[col_ids[j]] = j;
    std::vector<Triplet> t;
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        const std::size_t i = row_ids[r];
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t c = col_map[col_idx_[k]];
            if (c != kAbsent) t.push_back({r, c, values_[k]});
        }
    }
    return from_triplets(row_ids.size(), col_ids.size(), std::move(t));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    assert(a.cols() == b.rows());
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<double> acc(b.cols(), 0.0);
    std::vector<std::size_t> marker(b.cols(), kUnset);
    std::vector<std::size_t> touched;
    std::vector<SparseMatrix::Triplet> out;
    const auto& arp = a.row_ptr();
    const auto& aci = a.col_idx();
    const auto& av = a.values();
    const auto& brp = b.row_ptr();
    const auto& bci = b.col_idx();
    const auto& bv = b.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        touched.clear();
        for (std::size_t ka = arp[i]; ka < arp[i + 1]; ++ka) {
            const std::size_t k = aci[ka];
            for (std::size_t kb = brp[k]; kb < brp[k + 1]; ++kb) {
                const std::size_t j = bci[kb];
                if (marker[j] != i) {
                    marker[j] = i;
                    acc[j] = 0.0;
                    touched.push_back(j);
                }
                acc[j] += av[ka] * bv[kb];
            }
        }
        for (std::size_t j : touched) out.push_back({i, j, acc[j]});
    }
    return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(out));
}

SparseMatrix galerkin_product(const SparseMatrix& p, const SparseMatrix& a) {
    return multiply(p.transpose(), multiply(a, p));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double beta) {
    assert(a.rows() == b.rows() && a.cols() == b.cols());
    std::vector<SparseMatrix::Triplet> t;
    t.reserve(a.nonzeros() + b.nonzeros());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            t.push_back({i, a.col_idx()[k], a.values()[k]});
        for (std::size_t k = b.row_ptr()[i]; k < b.row_ptr()[i + 1]; ++k)
            t.push_back({i, b.col_idx()[k], beta * b.values()[k]});
    }
    return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    std::vector<SparseMatrix::Triplet> t;
    t.reserve(a.nonzeros() * b.nonzeros());
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ka = a.row_ptr()[ia]; ka < a.row_ptr()[ia + 1]; ++ka)
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t kb = b.row_ptr()[ib]; kb < b.row_ptr()[ib + 1]; ++kb)
                    t.push_back({ia * b.rows() + ib, a.col_idx()[ka] * b.cols() + b.col_idx()[kb],
                                 a.values()[ka] * b.values()[kb]});
    return SparseMatrix::from_triplets(a.rows() * b.rows(), a.cols() * b.cols(), std::move(t));
}

double symmetry_defect(const SparseMatrix& a) {
    const double scale = a.max_abs();
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
            worst = std::max(worst, std::abs(a.values()[k] - a.at(a.col_idx()[k], i)));
    return worst / scale;
}

CgResult conjugate_gradient(const SparseMatrix& a, std::span<const double> b, double tol, std::size_t maxiter) {
    const std::size_t n = a.rows();
    CgResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) return res;
    const Vector diag = a.diagonal();
    Vector r(b.begin(), b.end());
    Vector z(n), p(n), ap(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 0; it < maxiter; ++it) {
        a.multiply_into(p, ap);
        const double alpha = rz / dot(p, ap);
        axpy(alpha, p, res.x);
        axpy(-alpha, ap, r);
        res.iterations = it + 1;
        res.relative_residual = norm2(r) / bnorm;
        if (res.relative_residual <= tol) break;
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return res;
}

} // namespace vexmg::linalg
