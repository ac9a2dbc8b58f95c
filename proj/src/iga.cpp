#include "vexmg/iga.hpp"

#include "vexmg/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace vexmg::iga {

using bspline::KnotVector;

// ---------------------------------------------------------------------------
// spaces and fields

SplineSpace::SplineSpace(std::vector<KnotVector> directions) : directions_(std::move(directions)), n_dof_(1) {
    assert(directions_.size() == 1 || directions_.size() == 2);
    for (const auto& kv : directions_) n_dof_ *= kv.n_basis();
}

SplineSpace SplineSpace::uniform(int dims, int degree, std::size_t n_elements) {
    std::vector<KnotVector> dirs;
    for (int d = 0; d < dims; ++d) dirs.push_back(bspline::make_open_uniform_knots(degree, n_elements, 0.0, 1.0));
    return SplineSpace(std::move(dirs));
}

std::vector<std::size_t> SplineSpace::boundary_indices() const {
    std::vector<std::size_t> out;
    if (dims() == 1) return {0, n_dof_ - 1};
    const std::size_t nx = n_basis(0);
    const std::size_t ny = n_basis(1);
    for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iy = 0; iy < ny; ++iy)
            if (ix == 0 || iy == 0 || ix + 1 == nx || iy + 1 == ny) out.push_back(index(ix, iy));
    return out;
}

std::vector<std::size_t> SplineSpace::interior_indices() const {
    std::vector<std::size_t> out;
    if (dims() == 1) {
        for (std::size_t i = 1; i + 1 < n_dof_; ++i) out.push_back(i);
        return out;
    }
    const std::size_t nx = n_basis(0);
    const std::size_t ny = n_basis(1);
    for (std::size_t ix = 1; ix + 1 < nx; ++ix)
        for (std::size_t iy = 1; iy + 1 < ny; ++iy) out.push_back(index(ix, iy));
    return out;
}

SplineSpace SplineSpace::refined() const {
    std::vector<KnotVector> dirs;
    for (const auto& kv : directions_) dirs.push_back(bspline::refine_dyadic(kv).fine);
    return SplineSpace(std::move(dirs));
}

SplineField::SplineField(SplineSpace s, Vector c) : space(std::move(s)), coefficients(std::move(c)) {
    assert(coefficients.size() == space.n_dof());
}

FieldValue eval_field(const SplineField& field, double x, double y) {
    const auto& sp = field.space;
    const auto& c = field.coefficients;
    FieldValue out;
    const int p = sp.degree();
    const int nd = std::min(2, p);
    const auto ex = bspline::eval_basis(sp.knots(0), x, nd);
    if (sp.dims() == 1) {
        const std::size_t f = ex.first_index();
        for (int a = 0; a <= p; ++a) {
            out.value += c[f + a] * ex.derivatives[0][a];
            if (nd >= 1) out.gradient[0] += c[f + a] * ex.derivatives[1][a];
            if (nd >= 2) out.hessian[0][0] += c[f + a] * ex.derivatives[2][a];
        }
        return out;
    }
    const int py = sp.knots(1).degree();
    const int ndy = std::min(2, py);
    const auto ey = bspline::eval_basis(sp.knots(1), y, ndy);
    auto dx = [&](int r, int a) { return r <= nd ? ex.derivatives[r][a] : 0.0; };
    auto dy = [&](int r, int b) { return r <= ndy ? ey.derivatives[r][b] : 0.0; };
    for (int a = 0; a <= p; ++a) {
        for (int b = 0; b <= py; ++b) {
            const double cab = c[sp.index(ex.first_index() + a, ey.first_index() + b)];
            out.value += cab * dx(0, a) * dy(0, b);
            out.gradient[0] += cab * dx(1, a) * dy(0, b);
            out.gradient[1] += cab * dx(0, a) * dy(1, b);
            out.hessian[0][0] += cab * dx(2, a) * dy(0, b);
            out.hessian[1][1] += cab * dx(0, a) * dy(2, b);
            out.hessian[0][1] += cab * dx(1, a) * dy(1, b);
        }
    }
    out.hessian[1][0] = out.hessian[0][1];
    return out;
}

DirectionTable tabulate(const KnotVector& kv, int n_points, int max_deriv) {
    DirectionTable t;
    t.degree = kv.degree();
    t.n_points = n_points;
    t.max_deriv = max_deriv;
    const auto& bp = kv.breakpoints();
    const std::size_t ne = kv.n_elements();
    t.first_basis.resize(ne);
    t.points.resize(ne);
    t.weights.resize(ne);
    t.basis.resize(ne);
    const auto nb = static_cast<std::size_t>(t.degree + 1);
    for (std::size_t e = 0; e < ne; ++e) {
        const auto rule = bspline::gauss_rule(n_points, bp[e], bp[e + 1]);
        t.points[e] = rule.points;
        t.weights[e] = rule.weights;
        t.first_basis[e] = kv.element_span(e) - static_cast<std::size_t>(t.degree);
        t.basis[e].assign(static_cast<std::size_t>(n_points * (max_deriv + 1)) * nb, 0.0);
        for (int q = 0; q < n_points; ++q) {
            const auto ev = bspline::eval_basis(kv, rule.points[static_cast<std::size_t>(q)], max_deriv);
            assert(ev.first_index() == t.first_basis[e]);
            for (int r = 0; r <= max_deriv; ++r)
                for (std::size_t a = 0; a < nb; ++a)
                    t.basis[e][(static_cast<std::size_t>(q * (max_deriv + 1) + r)) * nb + a] =
                        ev.derivatives[static_cast<std::size_t>(r)][a];
        }
    }
    return t;
}

namespace {

int assembly_points(const SplineSpace& space) { return space.degree() + 1; }

/// CSR pattern of a tensor B-spline operator: dof couple when every per-direction
/// index differs by at most the degree.
class TensorPatternAssembler {
public:
    explicit TensorPatternAssembler(const SplineSpace& space) : space_(space) {
        const std::size_t n = space.n_dof();
        row_ptr_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto cols = neighbours(i);
            row_ptr_[i + 1] = row_ptr_[i] + cols.size();
            col_idx_.insert(col_idx_.end(), cols.begin(), cols.end());
        }
        values_.assign(col_idx_.size(), 0.0);
    }

    void add(std::size_t i, std::size_t j, double v) {
        const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
        const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
        const auto it = std::lower_bound(first, last, j);
        assert(it != last && *it == j);
        values_[static_cast<std::size_t>(it - col_idx_.begin())] += v;
    }

    SparseMatrix finish() && {
        const std::size_t n = space_.n_dof();
        return SparseMatrix::from_csr(n, n, std::move(row_ptr_), std::move(col_idx_), std::move(values_));
    }

private:
    std::vector<std::size_t> neighbours(std::size_t i) const {
        std::vector<std::size_t> out;
        const auto p = static_cast<std::ptrdiff_t>(space_.degree());
        if (space_.dims() == 1) {
            const auto n = static_cast<std::ptrdiff_t>(space_.n_dof());
            const auto ii = static_cast<std::ptrdiff_t>(i);
            for (auto j = std::max<std::ptrdiff_t>(0, ii - p); j <= std::min(n - 1, ii + p); ++j)
                out.push_back(static_cast<std::size_t>(j));
            return out;
        }
        const auto nx = static_cast<std::ptrdiff_t>(space_.n_basis(0));
        const auto ny = static_cast<std::ptrdiff_t>(space_.n_basis(1));
        const auto py = static_cast<std::ptrdiff_t>(space_.knots(1).degree());
        const auto ix = static_cast<std::ptrdiff_t>(i) / ny;
        const auto iy = static_cast<std::ptrdiff_t>(i) % ny;
        for (auto jx = std::max<std::ptrdiff_t>(0, ix - p); jx <= std::min(nx - 1, ix + p); ++jx)
            for (auto jy = std::max<std::ptrdiff_t>(0, iy - py); jy <= std::min(ny - 1, iy + py); ++jy)
                out.push_back(static_cast<std::size_t>(jx * ny + jy));
        return out;
    }

    const SplineSpace& space_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// Element-level 1D stiffness (derivative order 1) or mass (order 0) matrix.
std::vector<double> element_matrix_1d(const DirectionTable& t, std::size_t e, int order) {
    const int nb = t.degree + 1;
    std::vector<double> m(static_cast<std::size_t>(nb * nb), 0.0);
    for (int q = 0; q < t.n_points; ++q) {
        const double w = t.weights[e][static_cast<std::size_t>(q)];
        for (int a = 0; a < nb; ++a)
            for (int b = 0; b < nb; ++b) m[static_cast<std::size_t>(a * nb + b)] += w * t.b(e, q, order, a) * t.b(e, q, order, b);
    }
    return m;
}

enum class BilinearForm { stiffness, mass };

SparseMatrix assemble_bilinear(const SplineSpace& space, BilinearForm form) {
    TensorPatternAssembler asmb(space);
    const int nq = assembly_points(space);
    const auto tx = tabulate(space.knots(0), nq, 1);
    const int nbx = tx.degree + 1;
    if (space.dims() == 1) {
        const int order = form == BilinearForm::stiffness ? 1 : 0;
        for (std::size_t e = 0; e < space.n_elements(0); ++e) {
            const auto m = element_matrix_1d(tx, e, order);
            const std::size_t f = tx.first_basis[e];
            for (int a = 0; a < nbx; ++a)
                for (int b = 0; b < nbx; ++b) asmb.add(f + a, f + b, m[static_cast<std::size_t>(a * nbx + b)]);
        }
        return std::move(asmb).finish();
    }
    const auto ty = tabulate(space.knots(1), space.knots(1).degree() + 1, 1);
    const int nby = ty.degree + 1;
    for (std::size_t ex = 0; ex < space.n_elements(0); ++ex) {
        const auto kx = element_matrix_1d(tx, ex, 1);
        const auto mx = element_matrix_1d(tx, ex, 0);
        for (std::size_t ey = 0; ey < space.n_elements(1); ++ey) {
            const auto ky = element_matrix_1d(ty, ey, 1);
            const auto my = element_matrix_1d(ty, ey, 0);
            // tensor quadrature factorises the element integrals direction by direction
            for (int a = 0; a < nbx; ++a) {
                for (int b = 0; b < nby; ++b) {
                    const std::size_t row = space.index(tx.first_basis[ex] + a, ty.first_basis[ey] + b);
                    for (int c = 0; c < nbx; ++c) {
                        const double kac = kx[static_cast<std::size_t>(a * nbx + c)];
                        const double mac = mx[static_cast<std::size_t>(a * nbx + c)];
                        for (int d = 0; d < nby; ++d) {
                            const double kbd = ky[static_cast<std::size_t>(b * nby + d)];
                            const double mbd = my[static_cast<std::size_t>(b * nby + d)];
                            const double v = form == BilinearForm::stiffness ? kac * mbd + mac * kbd : mac * mbd;
                            asmb.add(row, space.index(tx.first_basis[ex] + c, ty.first_basis[ey] + d), v);
                        }
                    }
                }
            }
        }
    }
    return std::move(asmb).finish();
}

/// Derivative grid of a 2D field on one element: values[k][qx * nqy + qy] for
/// k in {u, u_x, u_y, u_xx, u_yy, u_xy}.
struct LocalDerivatives {
    static constexpr int kCount = 6;
    std::array<std::vector<double>, kCount> values;
};

constexpr std::array<std::array<int, 2>, LocalDerivatives::kCount> kOrders{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}}};

void evaluate_element_2d(const SplineSpace& space, std::span<const double> coeffs, const DirectionTable& tx,
                         const DirectionTable& ty, std::size_t ex, std::size_t ey, int max_total_order,
                         LocalDerivatives& out) {
    const int nbx = tx.degree + 1;
    const int nby = ty.degree + 1;
    const int nqx = tx.n_points;
    const int nqy = ty.n_points;
    // tmp[dy][a][qy] = sum_b c[a][b] By^(dy)_b(qy)
    std::vector<double> tmp(static_cast<std::size_t>(3 * nbx * nqy), 0.0);
    const int max_dy = std::min(ty.max_deriv, max_total_order);
    for (int dy = 0; dy <= max_dy; ++dy)
        for (int a = 0; a < nbx; ++a)
            for (int qy = 0; qy < nqy; ++qy) {
                double s = 0.0;
                for (int b = 0; b < nby; ++b)
                    s += coeffs[space.index(tx.first_basis[ex] + a, ty.first_basis[ey] + b)] * ty.b(ey, qy, dy, b);
                tmp[static_cast<std::size_t>((dy * nbx + a) * nqy + qy)] = s;
            }
    for (int k = 0; k < LocalDerivatives::kCount; ++k) {
        const auto [dx, dy] = kOrders[static_cast<std::size_t>(k)];
        auto& v = out.values[static_cast<std::size_t>(k)];
        v.assign(static_cast<std::size_t>(nqx * nqy), 0.0);
        if (dx + dy > max_total_order || dx > tx.max_deriv || dy > ty.max_deriv) continue;
        for (int qx = 0; qx < nqx; ++qx)
            for (int qy = 0; qy < nqy; ++qy) {
                double s = 0.0;
                for (int a = 0; a < nbx; ++a) s += tx.b(ex, qx, dx, a) * tmp[static_cast<std::size_t>((dy * nbx + a) * nqy + qy)];
                v[static_cast<std::size_t>(qx * nqy + qy)] = s;
            }
    }
}

/// F[a][b] += sum_q g(q) Bx_a(qx) By_b(qy), g already weighted.
void scatter_element_2d(const SplineSpace& space, const DirectionTable& tx, const DirectionTable& ty, std::size_t ex,
                        std::size_t ey, std::span<const double> g, std::span<double> load) {
    const int nbx = tx.degree + 1;
    const int nby = ty.degree + 1;
    const int nqx = tx.n_points;
    const int nqy = ty.n_points;
    std::vector<double> tmp(static_cast<std::size_t>(nqx * nby), 0.0);
    for (int qx = 0; qx < nqx; ++qx)
        for (int b = 0; b < nby; ++b) {
            double s = 0.0;
            for (int qy = 0; qy < nqy; ++qy) s += g[static_cast<std::size_t>(qx * nqy + qy)] * ty.b(ey, qy, 0, b);
            tmp[static_cast<std::size_t>(qx * nby + b)] = s;
        }
    for (int a = 0; a < nbx; ++a)
        for (int b = 0; b < nby; ++b) {
            double s = 0.0;
            for (int qx = 0; qx < nqx; ++qx) s += tx.b(ex, qx, 0, a) * tmp[static_cast<std::size_t>(qx * nby + b)];
            load[space.index(tx.first_basis[ex] + a, ty.first_basis[ey] + b)] += s;
        }
}

/// Generic load assembly: integrand(x, y, derivatives at the point) -> value.
/// `needed_order` selects how many field derivatives are evaluated.
template <class Integrand>
Vector assemble_field_load(const SplineSpace& space, const SplineField* field, int needed_order, int n_points,
                           Integrand&& integrand) {
    Vector load(space.n_dof(), 0.0);
    const int tab_order = std::max(0, std::min(needed_order, 2));
    const auto tx = tabulate(space.knots(0), n_points, tab_order);
    if (space.dims() == 1) {
        const int nb = tx.degree + 1;
        for (std::size_t e = 0; e < space.n_elements(0); ++e) {
            const std::size_t f = tx.first_basis[e];
            for (int q = 0; q < n_points; ++q) {
                std::array<double, LocalDerivatives::kCount> d{};
                if (field != nullptr) {
                    for (int a = 0; a < nb; ++a) {
                        const double c = field->coefficients[f + a];
                        d[0] += c * tx.b(e, q, 0, a);
                        if (tab_order >= 1) d[1] += c * tx.b(e, q, 1, a);
                        if (tab_order >= 2) d[3] += c * tx.b(e, q, 2, a);
                    }
                }
                const double x = tx.points[e][static_cast<std::size_t>(q)];
                const double g = tx.weights[e][static_cast<std::size_t>(q)] * integrand(x, 0.0, d);
                for (int a = 0; a < nb; ++a) load[f + a] += g * tx.b(e, q, 0, a);
            }
        }
        return load;
    }
    const auto ty = tabulate(space.knots(1), n_points, tab_order);
    const int nqy = ty.n_points;
    LocalDerivatives local;
    std::vector<double> g(static_cast<std::size_t>(n_points * nqy));
    for (std::size_t ex = 0; ex < space.n_elements(0); ++ex) {
        for (std::size_t ey = 0; ey < space.n_elements(1); ++ey) {
            if (field != nullptr) evaluate_element_2d(space, field->coefficients, tx, ty, ex, ey, needed_order, local);
            for (int qx = 0; qx < n_points; ++qx) {
                for (int qy = 0; qy < nqy; ++qy) {
                    const auto k = static_cast<std::size_t>(qx * nqy + qy);
                    std::array<double, LocalDerivatives::kCount> d{};
                    if (field != nullptr)
                        for (std::size_t j = 0; j < d.size(); ++j) d[j] = local.values[j][k];
                    const double w = tx.weights[ex][static_cast<std::size_t>(qx)] * ty.weights[ey][static_cast<std::size_t>(qy)];
                    g[k] = w * integrand(tx.points[ex][static_cast<std::size_t>(qx)], ty.points[ey][static_cast<std::size_t>(qy)], d);
                }
            }
            scatter_element_2d(space, tx, ty, ex, ey, g, load);
        }
    }
    return load;
}

} // namespace

SparseMatrix assemble_stiffness(const SplineSpace& space) { return assemble_bilinear(space, BilinearForm::stiffness); }

SparseMatrix assemble_mass(const SplineSpace& space) { return assemble_bilinear(space, BilinearForm::mass); }

Vector assemble_load(const SplineSpace& space, const ScalarFunction& f) {
    return assemble_field_load(space, nullptr, 0, assembly_points(space),
                               [&](double x, double y, const auto&) { return f(x, y); });
}

Vector assemble_bratu_rhs(const SplineSpace& space, double lambda, const ScalarFunction& f, const SplineField& u_prev) {
    assert(u_prev.coefficients.size() == space.n_dof());
    constexpr double kExpLimit = 700.0;
    return assemble_field_load(space, &u_prev, 0, assembly_points(space), [&](double x, double y, const auto& d) {
        const double u = d[0];
        if (!(u <= kExpLimit)) throw Overflow("exp(u) overflow in Bratu load: u = " + std::to_string(u));
        return f(x, y) - lambda * std::exp(u);
    });
}

double monge_ampere_operator(double laplacian, double hessian_det, double f) {
    const double radicand = laplacian * laplacian + 2.0 * (f - hessian_det);
    return std::sqrt(std::max(0.0, radicand));
}

MongeAmpereLoad assemble_monge_ampere_rhs(const SplineSpace& space, const ScalarFunction& f, const SplineField& u_prev) {
    if (space.dims() != 2) throw DegreeTooLow("Monge-Ampere load requires a two-dimensional space");
    if (space.degree() < 2 || space.knots(1).degree() < 2)
        throw DegreeTooLow("Monge-Ampere load requires degree >= 2");
    std::size_t clamped = 0;
    std::size_t total = 0;
    MongeAmpereLoad out;
    out.load = assemble_field_load(space, &u_prev, 2, assembly_points(space), [&](double x, double y, const auto& d) {
        const double uxx = d[3];
        const double uyy = d[4];
        const double uxy = d[5];
        const double lap = uxx + uyy;
        const double det = uxx * uyy - uxy * uxy;
        const double fv = f(x, y);
        ++total;
        if (lap * lap + 2.0 * (fv - det) < 0.0) ++clamped;
        return -monge_ampere_operator(lap, det, fv);
    });
    out.clamped_fraction = total == 0 ? 0.0 : static_cast<double>(clamped) / static_cast<double>(total);
    return out;
}

// ---------------------------------------------------------------------------
// boundary handling

Vector DirichletLayout::restrict_interior(std::span<const double> full) const {
    Vector out(interior_indices.size());
    for (std::size_t k = 0; k < interior_indices.size(); ++k) out[k] = full[interior_indices[k]];
    return out;
}

Vector DirichletLayout::expand(std::span<const double> interior) const {
    assert(interior.size() == interior_indices.size());
    Vector full(interior_indices.size() + boundary_indices.size(), 0.0);
    for (std::size_t k = 0; k < interior_indices.size(); ++k) full[interior_indices[k]] = interior[k];
    for (std::size_t k = 0; k < boundary_indices.size(); ++k) full[boundary_indices[k]] = boundary_values[k];
    return full;
}

namespace {

/// Coefficients of the 1D spline interpolating g at the Greville abscissae.
Vector greville_interpolant(const KnotVector& kv, const std::function<double(double)>& g) {
    const std::size_t n = kv.n_basis();
    linalg::DenseMatrix colloc(n, n);
    Vector rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = kv.greville(i);
        const auto ev = bspline::eval_basis(kv, xi, 0);
        for (std::size_t a = 0; a < ev.values().size(); ++a) colloc(i, ev.first_index() + a) = ev.values()[a];
        rhs[i] = g(xi);
    }
    return linalg::lu_solve_dense(colloc, rhs);
}

} // namespace

DirichletLayout apply_dirichlet(const SplineSpace& space, const std::optional<ScalarFunction>& g) {
    DirichletLayout layout;
    layout.interior_indices = space.interior_indices();
    layout.boundary_indices = space.boundary_indices();
    layout.boundary_values.assign(layout.boundary_indices.size(), 0.0);
    if (!g) return layout;
    const auto& gf = *g;
    Vector full(space.n_dof(), 0.0);
    if (space.dims() == 1) {
        full.front() = gf(space.knots(0).front(), 0.0);
        full.back() = gf(space.knots(0).back(), 0.0);
    } else {
        const auto& kx = space.knots(0);
        const auto& ky = space.knots(1);
        const std::size_t nx = space.n_basis(0);
        const std::size_t ny = space.n_basis(1);
        const auto bottom = greville_interpolant(kx, [&](double x) { return gf(x, ky.front()); });
        const auto top = greville_interpolant(kx, [&](double x) { return gf(x, ky.back()); });
        const auto left = greville_interpolant(ky, [&](double y) { return gf(kx.front(), y); });
        const auto right = greville_interpolant(ky, [&](double y) { return gf(kx.back(), y); });
        for (std::size_t ix = 0; ix < nx; ++ix) {
            full[space.index(ix, 0)] = bottom[ix];
            full[space.index(ix, ny - 1)] = top[ix];
        }
        for (std::size_t iy = 0; iy < ny; ++iy) {
            full[space.index(0, iy)] = left[iy];
            full[space.index(nx - 1, iy)] = right[iy];
        }
    }
    for (std::size_t k = 0; k < layout.boundary_indices.size(); ++k)
        layout.boundary_values[k] = full[layout.boundary_indices[k]];
    return layout;
}

InteriorSystem split_operator(const SparseMatrix& a, const DirichletLayout& layout) {
    return {a.submatrix(layout.interior_indices, layout.interior_indices),
            a.submatrix(layout.interior_indices, layout.boundary_indices)};
}

Vector lifted_rhs(const InteriorSystem& sys, const DirichletLayout& layout, std::span<const double> load) {
    Vector rhs = layout.restrict_interior(load);
    const Vector lift = sys.a_ib.multiply(layout.boundary_values);
    linalg::axpy(-1.0, lift, rhs);
    return rhs;
}

// ---------------------------------------------------------------------------
// norms and projections

double l2_error(const SplineField& field, const ScalarFunction& exact) {
    const auto& space = field.space;
    const int nq = space.degree() + 2;
    const auto tx = tabulate(space.knots(0), nq, 0);
    double sum = 0.0;
    if (space.dims() == 1) {
        for (std::size_t e = 0; e < space.n_elements(0); ++e) {
            for (int q = 0; q < nq; ++q) {
                double uh = 0.0;
                for (int a = 0; a <= tx.degree; ++a) uh += field.coefficients[tx.first_basis[e] + a] * tx.b(e, q, 0, a);
                const double diff = uh - exact(tx.points[e][static_cast<std::size_t>(q)], 0.0);
                sum += tx.weights[e][static_cast<std::size_t>(q)] * diff * diff;
            }
        }
        return std::sqrt(sum);
    }
    const auto ty = tabulate(space.knots(1), space.knots(1).degree() + 2, 0);
    LocalDerivatives local;
    for (std::size_t ex = 0; ex < space.n_elements(0); ++ex)
        for (std::size_t ey = 0; ey < space.n_elements(1); ++ey) {
            evaluate_element_2d(space, field.coefficients, tx, ty, ex, ey, 0, local);
            for (int qx = 0; qx < tx.n_points; ++qx)
                for (int qy = 0; qy < ty.n_points; ++qy) {
                    const double x = tx.points[ex][static_cast<std::size_t>(qx)];
                    const double y = ty.points[ey][static_cast<std::size_t>(qy)];
                    const double diff = local.values[0][static_cast<std::size_t>(qx * ty.n_points + qy)] - exact(x, y);
                    sum += tx.weights[ex][static_cast<std::size_t>(qx)] * ty.weights[ey][static_cast<std::size_t>(qy)] * diff * diff;
                }
        }
    return std::sqrt(sum);
}

SplineField l2_projection(const SplineSpace& space, const ScalarFunction& u) {
    const auto mass = assemble_mass(space);
    const int nq = space.degree() + 2;
    const Vector load = assemble_field_load(space, nullptr, 0, nq, [&](double x, double y, const auto&) { return u(x, y); });
    auto cg = linalg::conjugate_gradient(mass, load, 1e-15, 20 * space.n_dof() + 100);
    return SplineField(space, std::move(cg.x));
}

double mass_norm(const SparseMatrix& mass, std::span<const double> v) {
    const Vector mv = mass.multiply(v);
    return std::sqrt(std::max(0.0, linalg::dot(v, mv)));
}

} // namespace vexmg::iga
