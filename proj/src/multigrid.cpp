#include "vexmg/multigrid.hpp"

#include <cassert>
#include <algorithm>
#include <cmath>
#include <string>

namespace vexmg::multigrid {

namespace {

Vector inverse_diagonal(const SparseMatrix& a) {
    Vector d = a.diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) throw ZeroDiagonal(i);
        d[i] = 1.0 / d[i];
    }
    return d;
}

std::size_t interior_per_direction(const iga::SplineSpace& s) {
    std::size_t m = 0;
    for (int d = 0; d < s.dims(); ++d) m = std::max(m, s.n_basis(d) >= 2 ? s.n_basis(d) - 2 : 0);
    return m;
}

iga::SplineSpace coarsen(const iga::SplineSpace& fine) {
    std::vector<bspline::KnotVector> dirs;
    for (int d = 0; d < fine.dims(); ++d) {
        const auto& kv = fine.knots(d);
        const std::size_t ne = kv.n_elements();
        if (ne % 2 != 0 || ne < 2) throw TooCoarse("cannot halve " + std::to_string(ne) + " elements");
        dirs.push_back(bspline::make_open_uniform_knots(kv.degree(), ne / 2, kv.front(), kv.back()));
    }
    iga::SplineSpace coarse(std::move(dirs));
    if (coarse.interior_indices().empty()) throw TooCoarse("coarse level has no interior dof");
    return coarse;
}

SparseMatrix interior_operator(const iga::SplineSpace& space) {
    const auto interior = space.interior_indices();
    return iga::assemble_stiffness(space).submatrix(interior, interior);
}

/// Interior rows/columns of a one-dimensional knot-insertion matrix.
SparseMatrix interior_prolongation_1d(const bspline::KnotVector& coarse, const bspline::KnotVector& fine) {
    const auto map = bspline::refine_dyadic(coarse);
    assert(map.fine.knots() == fine.knots());
    (void)fine;
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    for (std::size_t i = 1; i + 1 < map.fine.n_basis(); ++i) rows.push_back(i);
    for (std::size_t j = 1; j + 1 < coarse.n_basis(); ++j) cols.push_back(j);
    return map.matrix.submatrix(rows, cols);
}

void jacobi_in_place(const SparseMatrix& a, const Vector& inv_diag, std::span<const double> b, Vector& x,
                     double omega, int sweeps, Vector& work) {
    for (int s = 0; s < sweeps; ++s) {
        a.residual_into(b, x, work);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += omega * inv_diag[i] * work[i];
    }
}

void v_cycle_level(const GridHierarchy& h, std::size_t lvl, std::span<const double> b, Vector& x,
                   const SmootherConfig& cfg, std::size_t& visited) {
    ++visited;
    const Level& L = h.level(lvl);
    if (lvl == 0) {
        x = h.coarse_solver().solve(b);
        return;
    }
    Vector res(x.size());
    jacobi_in_place(L.a, L.inv_diag, b, x, cfg.omega, cfg.nu1, res);
    L.a.residual_into(b, x, res);
    const Level& C = h.level(lvl - 1);
    const Vector rc = C.r.multiply(res);
    Vector ec(rc.size(), 0.0);
    v_cycle_level(h, lvl - 1, rc, ec, cfg, visited);
    const Vector correction = C.p.multiply(ec);
    linalg::axpy(1.0, correction, x);
    jacobi_in_place(L.a, L.inv_diag, b, x, cfg.omega, cfg.nu2, res);
}

double residual_norm(const SparseMatrix& a, std::span<const double> b, std::span<const double> x) {
    Vector r(b.size());
    a.residual_into(b, x, r);
    return linalg::norm2(r);
}

} // namespace

GridHierarchy::GridHierarchy(std::vector<Level> levels, Coarsening coarsening)
    : levels_(std::move(levels)), coarsening_(coarsening) {
    assert(!levels_.empty());
    coarse_lu_ = linalg::DenseLU(levels_.front().a.to_dense());
}

SparseMatrix interior_prolongation(const iga::SplineSpace& coarse, const iga::SplineSpace& fine) {
    assert(coarse.dims() == fine.dims());
    SparseMatrix p = interior_prolongation_1d(coarse.knots(0), fine.knots(0));
    if (coarse.dims() == 2) p = linalg::kron(p, interior_prolongation_1d(coarse.knots(1), fine.knots(1)));
    return p;
}

std::size_t default_level_count(const iga::SplineSpace& fine, std::size_t threshold) {
    std::size_t levels = 1;
    iga::SplineSpace current = fine;
    while (interior_per_direction(current) > threshold) {
        try {
            current = coarsen(current);
        } catch (const TooCoarse&) {
            break;
        }
        ++levels;
    }
    return levels;
}

GridHierarchy build_hierarchy(const iga::SplineSpace& fine, std::size_t n_levels, Coarsening coarsening) {
    if (n_levels == 0) throw TooCoarse("hierarchy needs at least one level");
    if (fine.interior_indices().empty()) throw TooCoarse("fine level has no interior dof");
    std::vector<iga::SplineSpace> spaces{fine};
    for (std::size_t l = 1; l < n_levels; ++l) spaces.push_back(coarsen(spaces.back()));
    std::reverse(spaces.begin(), spaces.end()); // coarse to fine

    std::vector<Level> levels;
    levels.reserve(n_levels);
    for (const auto& s : spaces) levels.push_back(Level{s, {}, {}, {}, {}});
    levels.back().a = interior_operator(fine);
    for (std::size_t l = n_levels - 1; l-- > 0;) {
        levels[l].p = interior_prolongation(levels[l].space, levels[l + 1].space);
        levels[l].r = levels[l].p.transpose();
        levels[l].a = coarsening == Coarsening::galerkin ? linalg::galerkin_product(levels[l].p, levels[l + 1].a)
                                                         : interior_operator(levels[l].space);
    }
    for (auto& L : levels) L.inv_diag = inverse_diagonal(L.a);
    return GridHierarchy(std::move(levels), coarsening);
}

GridHierarchy build_hierarchy(const iga::SplineSpace& fine, Coarsening coarsening) {
    return build_hierarchy(fine, default_level_count(fine), coarsening);
}

Vector smooth(const SparseMatrix& a, std::span<const double> b, std::span<const double> x, const SmootherConfig& cfg,
              int sweeps) {
    assert(cfg.omega > 0.0 && cfg.omega < 2.0);
    const Vector inv_diag = inverse_diagonal(a);
    Vector out(x.begin(), x.end());
    Vector work(out.size());
    jacobi_in_place(a, inv_diag, b, out, cfg.omega, sweeps, work);
    return out;
}

CycleResult v_cycle(const GridHierarchy& h, std::span<const double> b, std::span<const double> x0,
                    const SmootherConfig& cfg) {
    assert(b.size() == h.n_interior() && x0.size() == h.n_interior());
    CycleResult out;
    out.report.initial_residual_norm = residual_norm(h.finest().a, b, x0);
    out.x.assign(x0.begin(), x0.end());
    v_cycle_level(h, h.size() - 1, b, out.x, cfg, out.report.levels_visited);
    out.report.final_residual_norm = residual_norm(h.finest().a, b, out.x);
    out.report.cycles = 1;
    return out;
}

CycleResult two_grid(const GridHierarchy& h, std::span<const double> b, std::span<const double> x0,
                     const SmootherConfig& cfg) {
    if (h.size() < 2) throw TooCoarse("two-grid cycle needs two levels");
    const Level& F = h.finest();
    const Level& C = h.level(h.size() - 2);
    CycleResult out;
    out.report.initial_residual_norm = residual_norm(F.a, b, x0);
    Vector x = smooth(F.a, b, x0, cfg, cfg.nu1);
    Vector res(x.size());
    F.a.residual_into(b, x, res);
    const Vector ec = linalg::lu_solve_dense(C.a.to_dense(), C.r.multiply(res));
    linalg::axpy(1.0, C.p.multiply(ec), x);
    out.x = smooth(F.a, b, x, cfg, cfg.nu2);
    out.report.final_residual_norm = residual_norm(F.a, b, out.x);
    out.report.levels_visited = 2;
    out.report.cycles = 1;
    return out;
}

SolveResult solve_to_tolerance(const GridHierarchy& h, std::span<const double> b, std::span<const double> x0,
                               const SmootherConfig& cfg, double tol, std::size_t maxiter) {
    assert(tol > 0.0);
    SolveResult out;
    out.x.assign(x0.begin(), x0.end());
    const double bnorm = linalg::norm2(b);
    const double scale = bnorm > 0.0 ? bnorm : 1.0;
    double res = residual_norm(h.finest().a, b, out.x);
    out.report.initial_residual_norm = res;
    out.report.final_residual_norm = res;
    if (res / scale <= tol) {
        out.converged = true;
        return out;
    }
    for (std::size_t k = 0; k < maxiter; ++k) {
        auto cyc = v_cycle(h, b, out.x, cfg);
        out.x = std::move(cyc.x);
        out.report.levels_visited += cyc.report.levels_visited;
        out.report.cycles = k + 1;
        res = cyc.report.final_residual_norm;
        out.report.final_residual_norm = res;
        if (res / scale <= tol) {
            out.converged = true;
            return out;
        }
    }
    out.failure.emplace(out.report.cycles, res / scale);
    return out;
}

} // namespace vexmg::multigrid
