#include "vexmg/bspline.hpp"

#include "vexmg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace vexmg::bspline {

KnotVector::KnotVector(int degree, std::vector<double> knots) : degree_(degree), knots_(std::move(knots)) {
    const auto p = static_cast<std::size_t>(degree_);
    if (degree_ < 0 || knots_.size() < 2 * p + 2) throw InvalidInterval("knot vector too short for its degree");
    if (!std::is_sorted(knots_.begin(), knots_.end())) throw InvalidInterval("knots must be non-decreasing");
    if (!(knots_[p] < knots_[knots_.size() - p - 1])) throw InvalidInterval("empty parameter domain");
    for (std::size_t j = p; j + p + 1 < knots_.size(); ++j) {
        if (knots_[j] < knots_[j + 1]) {
            if (breakpoints_.empty()) breakpoints_.push_back(knots_[j]);
            breakpoints_.push_back(knots_[j + 1]);
            element_spans_.push_back(j);
        }
    }
}

std::size_t KnotVector::find_span(double t) const {
    const auto p = static_cast<std::size_t>(degree_);
    const std::size_t n = n_basis();
    const double lo = knots_[p];
    const double hi = knots_[n];
    if (!(t >= lo && t <= hi)) throw OutOfDomain("parameter " + std::to_string(t) + " outside knot domain");
    if (t == hi) return element_spans_.back();
    // last j with t_j <= t
    const auto it = std::upper_bound(knots_.begin() + static_cast<std::ptrdiff_t>(p),
                                     knots_.begin() + static_cast<std::ptrdiff_t>(n) + 1, t);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
}

double KnotVector::greville(std::size_t i) const {
    double s = 0.0;
    for (int k = 1; k <= degree_; ++k) s += knots_[i + static_cast<std::size_t>(k)];
    return degree_ == 0 ? 0.5 * (knots_[i] + knots_[i + 1]) : s / degree_;
}

KnotVector make_open_uniform_knots(int degree, std::size_t n_elements, double a, double b) {
    if (!(a < b)) throw InvalidInterval("interval requires a < b");
    if (degree < 0 || n_elements < 1) throw InvalidInterval("degree must be >= 0 and n_elements >= 1");
    std::vector<double> knots;
    knots.reserve(n_elements + 2 * static_cast<std::size_t>(degree) + 1);
    knots.insert(knots.end(), static_cast<std::size_t>(degree), a);
    for (std::size_t e = 0; e <= n_elements; ++e) {
        const double s = static_cast<double>(e) / static_cast<double>(n_elements);
        knots.push_back(e == n_elements ? b : a + (b - a) * s);
    }
    knots.insert(knots.end(), static_cast<std::size_t>(degree), b);
    return KnotVector(degree, std::move(knots));
}

BasisEvaluation eval_basis(const KnotVector& kv, double t, int max_deriv) {
    const int p = kv.degree();
    const auto& u = kv.knots();
    const std::size_t span = kv.find_span(t);
    const int nd = std::max(0, max_deriv);

    // ndu: upper triangle holds basis values of increasing degree, lower triangle knot differences
    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1), right(p + 1);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = t - u[span + 1 - j];
        right[j] = u[span + j] - t;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[j][r] == 0.0 ? 0.0 : ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    BasisEvaluation out;
    out.span_index = span;
    out.degree = p;
    out.derivatives.assign(nd + 1, std::vector<double>(p + 1, 0.0));
    for (int j = 0; j <= p; ++j) out.derivatives[0][j] = ndu[j][p];

    // derivatives by the differentiation formula on lower-degree bases
    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0;
        int s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= std::min(nd, p); ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                a[s2][0] = ndu[pk + 1][rk] == 0.0 ? 0.0 : a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = ndu[pk + 1][rk + j] == 0.0 ? 0.0 : (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = ndu[pk + 1][r] == 0.0 ? 0.0 : -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            out.derivatives[k][r] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= std::min(nd, p); ++k) {
        for (double& v : out.derivatives[k]) v *= factor;
        factor *= (p - k);
    }
    return out;
}

double eval_spline(const KnotVector& kv, std::span<const double> coefficients, double t, int deriv) {
    const BasisEvaluation ev = eval_basis(kv, t, deriv);
    const std::size_t first = ev.first_index();
    double s = 0.0;
    for (std::size_t a = 0; a < ev.derivatives[deriv].size(); ++a) s += coefficients[first + a] * ev.derivatives[deriv][a];
    return s;
}

RefinementMap insert_knots(const KnotVector& kv, const std::vector<double>& new_knots) {
    const int p = kv.degree();
    std::vector<double> u = kv.knots();
    const std::size_t n0 = kv.n_basis();
    // rows: current fine basis index, columns: coarse basis index
    std::vector<std::vector<double>> coeffs(n0, std::vector<double>(n0, 0.0));
    for (std::size_t i = 0; i < n0; ++i) coeffs[i][i] = 1.0;

    for (double t : new_knots) {
        const KnotVector current(p, u);
        const std::size_t k = current.find_span(t);
        const std::size_t n = coeffs.size();
        std::vector<std::vector<double>> next(n + 1, std::vector<double>(n0, 0.0));
        for (std::size_t i = 0; i <= n; ++i) {
            if (i + static_cast<std::size_t>(p) <= k) {
                next[i] = coeffs[i];
            } else if (i > k) {
                next[i] = coeffs[i - 1];
            } else {
                const double alpha = (t - u[i]) / (u[i + static_cast<std::size_t>(p)] - u[i]);
                for (std::size_t c = 0; c < n0; ++c) next[i][c] = alpha * coeffs[i][c] + (1.0 - alpha) * coeffs[i - 1][c];
            }
        }
        coeffs = std::move(next);
        u.insert(std::upper_bound(u.begin(), u.end(), t), t);
    }

    std::vector<linalg::SparseMatrix::Triplet> trip;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        for (std::size_t c = 0; c < n0; ++c)
            if (coeffs[i][c] != 0.0) trip.push_back({i, c, coeffs[i][c]});
    KnotVector fine(p, std::move(u));
    auto m = linalg::SparseMatrix::from_triplets(fine.n_basis(), n0, std::move(trip));
    return {kv, std::move(fine), std::move(m)};
}

RefinementMap refine_dyadic(const KnotVector& kv) {
    std::vector<double> mids;
    const auto& bp = kv.breakpoints();
    for (std::size_t e = 0; e + 1 < bp.size(); ++e) mids.push_back(0.5 * (bp[e] + bp[e + 1]));
    return insert_knots(kv, mids);
}

QuadratureRule gauss_rule(int n_points, double a, double b) {
    if (n_points < 1 || n_points > 16) throw UnsupportedOrder("Gauss rule supports 1..16 points");
    const int n = n_points;
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Chebyshev-like initial guess
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = mid - half * x;
        rule.points[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) rule.points[n / 2] = mid;
    return rule;
}

} // namespace vexmg::bspline
