#pragma once

#include "vexmg/linalg/sparse.hpp"

#include <cstddef>
#include <vector>

namespace vexmg::bspline {

/// Open knot vector: first and last knots repeated degree+1 times.
class KnotVector {
public:
    KnotVector(int degree, std::vector<double> knots);

    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }
    /// Number of basis functions, knots().size() - degree - 1.
    [[nodiscard]] std::size_t n_basis() const noexcept { return knots_.size() - static_cast<std::size_t>(degree_) - 1; }
    /// Number of non-empty knot spans.
    [[nodiscard]] std::size_t n_elements() const noexcept { return breakpoints_.size() - 1; }
    [[nodiscard]] double front() const noexcept { return knots_.front(); }
    [[nodiscard]] double back() const noexcept { return knots_.back(); }
    /// Distinct knot values in increasing order.
    [[nodiscard]] const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }

    /// Index j with t in [t_j, t_{j+1}), the right endpoint mapped to the last span.
    /// Throws OutOfDomain.
    [[nodiscard]] std::size_t find_span(double t) const;
    /// Knot span index of the element-th non-empty interval.
    [[nodiscard]] std::size_t element_span(std::size_t element) const { return element_spans_[element]; }

    /// Greville abscissa of basis function i.
    [[nodiscard]] double greville(std::size_t i) const;

private:
    int degree_;
    std::vector<double> knots_;
    std::vector<double> breakpoints_;
    std::vector<std::size_t> element_spans_;
};

[[nodiscard]] KnotVector make_open_uniform_knots(int degree, std::size_t n_elements, double a = 0.0,
                                                 double b = 1.0);

/// Non-zero basis functions (and derivatives) at one parameter value.
struct BasisEvaluation {
    std::size_t span_index = 0; ///< j; active functions are j-p .. j
    int degree = 0;
    /// derivatives[r][a] = d^r/dt^r N_{j-p+a}(t); derivatives[0] holds the values.
    std::vector<std::vector<double>> derivatives;

    [[nodiscard]] const std::vector<double>& values() const { return derivatives.front(); }
    [[nodiscard]] std::size_t first_index() const noexcept { return span_index - static_cast<std::size_t>(degree); }
};

/// Cox-de Boor evaluation of the p+1 active basis functions and their first
/// max_deriv derivatives (derivatives above the degree are zero).
[[nodiscard]] BasisEvaluation eval_basis(const KnotVector& kv, double t, int max_deriv = 0);

/// Evaluates sum_i c_i N_i(t).
[[nodiscard]] double eval_spline(const KnotVector& kv, std::span<const double> coefficients, double t, int deriv = 0);

/// Knot insertion from a coarse to a finer space.
struct RefinementMap {
    KnotVector coarse;
    KnotVector fine;
    linalg::SparseMatrix matrix; ///< fine n_basis x coarse n_basis
};

/// Inserts the midpoint of every non-empty span.
[[nodiscard]] RefinementMap refine_dyadic(const KnotVector& kv);

/// Knot-insertion matrix for inserting `new_knots` (sorted) into kv, built by
/// repeated single-knot insertion.
[[nodiscard]] RefinementMap insert_knots(const KnotVector& kv, const std::vector<double>& new_knots);

struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with 1 <= n_points <= 16 mapped to [a, b]. Throws UnsupportedOrder.
[[nodiscard]] QuadratureRule gauss_rule(int n_points, double a = -1.0, double b = 1.0);

} // namespace vexmg::bspline
