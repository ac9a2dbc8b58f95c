#pragma once

#include "vexmg/bspline.hpp"
#include "vexmg/linalg/sparse.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace vexmg::iga {

using linalg::SparseMatrix;
using linalg::Vector;

/// f(x, y); one-dimensional problems ignore y.
using ScalarFunction = std::function<double(double, double)>;

/// Tensor-product B-spline space on [0,1] or [0,1]^2.
///
/// Two-dimensional dof are numbered ix * n_basis(1) + iy, so that tensor
/// operators read as A_x (kron) A_y.
class SplineSpace {
public:
    explicit SplineSpace(std::vector<bspline::KnotVector> directions);

    static SplineSpace uniform(int dims, int degree, std::size_t n_elements);

    [[nodiscard]] int dims() const noexcept { return static_cast<int>(directions_.size()); }
    [[nodiscard]] const bspline::KnotVector& knots(int d) const { return directions_[static_cast<std::size_t>(d)]; }
    [[nodiscard]] std::size_t n_basis(int d) const { return knots(d).n_basis(); }
    [[nodiscard]] std::size_t n_dof() const noexcept { return n_dof_; }
    [[nodiscard]] int degree() const { return knots(0).degree(); }
    [[nodiscard]] std::size_t n_elements(int d = 0) const { return knots(d).n_elements(); }
    [[nodiscard]] std::size_t index(std::size_t ix, std::size_t iy) const { return ix * n_basis(1) + iy; }

    [[nodiscard]] std::vector<std::size_t> boundary_indices() const;
    [[nodiscard]] std::vector<std::size_t> interior_indices() const;

    /// Space with every span halved (dyadic refinement in each direction).
    [[nodiscard]] SplineSpace refined() const;

private:
    std::vector<bspline::KnotVector> directions_;
    std::size_t n_dof_;
};

struct SplineField {
    SplineSpace space;
    Vector coefficients;

    SplineField(SplineSpace s, Vector c);
    explicit SplineField(SplineSpace s) : SplineField(s, Vector(s.n_dof(), 0.0)) {}
};

struct FieldValue {
    double value = 0.0;
    std::array<double, 2> gradient{};
    std::array<std::array<double, 2>, 2> hessian{};
};

/// Value, gradient and (for degree >= 2) Hessian at a point. Throws OutOfDomain.
[[nodiscard]] FieldValue eval_field(const SplineField& field, double x, double y = 0.0);

/// Quadrature tabulation of one direction: per element, the first active
/// basis index and the basis values/derivatives at every Gauss point.
struct DirectionTable {
    int degree = 0;
    int n_points = 0;
    int max_deriv = 0;
    std::vector<std::size_t> first_basis;           ///< per element
    std::vector<std::vector<double>> points;        ///< per element
    std::vector<std::vector<double>> weights;       ///< per element
    /// basis[e][(q * (max_deriv + 1) + r) * (degree + 1) + a]
    std::vector<std::vector<double>> basis;

    [[nodiscard]] double b(std::size_t e, int q, int r, int a) const {
        return basis[e][static_cast<std::size_t>((q * (max_deriv + 1) + r) * (degree + 1) + a)];
    }
};

[[nodiscard]] DirectionTable tabulate(const bspline::KnotVector& kv, int n_points, int max_deriv);

/// Entry (i,j) = integral of grad B_i . grad B_j, over all dof.
[[nodiscard]] SparseMatrix assemble_stiffness(const SplineSpace& space);
/// Entry (i,j) = integral of B_i B_j, over all dof.
[[nodiscard]] SparseMatrix assemble_mass(const SplineSpace& space);

/// F_i = integral of f B_i, over all dof.
[[nodiscard]] Vector assemble_load(const SplineSpace& space, const ScalarFunction& f);

/// F_i = integral (f - lambda e^{u_prev}) B_i over all dof. Throws Overflow
/// when u_prev exceeds 700 at a quadrature node.
[[nodiscard]] Vector assemble_bratu_rhs(const SplineSpace& space, double lambda, const ScalarFunction& f,
                                        const SplineField& u_prev);

struct MongeAmpereLoad {
    Vector load;                    ///< F_i = -integral G(u_prev) B_i, over all dof
    double clamped_fraction = 0.0;  ///< share of quadrature points with negative radicand
    [[nodiscard]] bool negative_radicand() const noexcept { return clamped_fraction > 0.01; }
};

/// Load of -Lap u = -G(u_prev) with G(u) = sqrt(max(0, (Lap u)^2 + 2 (f - det H(u)))).
/// Two-dimensional spaces only; throws DegreeTooLow for degree < 2.
[[nodiscard]] MongeAmpereLoad assemble_monge_ampere_rhs(const SplineSpace& space, const ScalarFunction& f,
                                                        const SplineField& u_prev);

/// Pointwise G(u) from the Laplacian and Hessian determinant, radicand clamped at zero.
[[nodiscard]] double monge_ampere_operator(double laplacian, double hessian_det, double f);

/// Boundary/interior split of the dof with the boundary coefficients.
struct DirichletLayout {
    std::vector<std::size_t> interior_indices;
    std::vector<std::size_t> boundary_indices;
    Vector boundary_values; ///< aligned with boundary_indices

    [[nodiscard]] Vector restrict_interior(std::span<const double> full) const;
    /// Full coefficient vector from interior values and the stored boundary values.
    [[nodiscard]] Vector expand(std::span<const double> interior) const;
};

/// Homogeneous layout when g is empty; otherwise boundary coefficients
/// interpolate g at the Greville abscissae of each edge.
[[nodiscard]] DirichletLayout apply_dirichlet(const SplineSpace& space, const std::optional<ScalarFunction>& g);

/// Interior system pieces for a layout: A_II and the lifted right-hand side
/// F_I - A_IB g_B.
struct InteriorSystem {
    SparseMatrix a_ii;
    SparseMatrix a_ib;
};

[[nodiscard]] InteriorSystem split_operator(const SparseMatrix& a, const DirichletLayout& layout);
[[nodiscard]] Vector lifted_rhs(const InteriorSystem& sys, const DirichletLayout& layout, std::span<const double> load);

/// sqrt(integral (u_h - u)^2) with degree+2 Gauss points per span.
[[nodiscard]] double l2_error(const SplineField& field, const ScalarFunction& exact);

/// L2 projection by solving the mass system.
[[nodiscard]] SplineField l2_projection(const SplineSpace& space, const ScalarFunction& u);

/// sqrt(v^T M v).
[[nodiscard]] double mass_norm(const SparseMatrix& mass, std::span<const double> v);

} // namespace vexmg::iga
