#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vexmg/errors.hpp"
#include "vexmg/iga.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace vexmg;
using namespace vexmg::iga;
using linalg::DenseMatrix;

namespace {

constexpr double kPi = std::numbers::pi;

bool cholesky_succeeds(const SparseMatrix& a) {
    DenseMatrix l = a.to_dense();
    const std::size_t n = l.rows();
    for (std::size_t j = 0; j < n; ++j) {
        double d = l(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= 0.0) return false;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = l(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return true;
}

// Composite Gauss rule on a much finer partition: oracle for 1D integrals.
template <typename F>
double integrate(F f, double a, double b, int pieces = 400) {
    const auto rule = bspline::gauss_rule(10);
    double s = 0.0;
    for (int k = 0; k < pieces; ++k) {
        const double lo = a + (b - a) * k / pieces;
        const double hi = a + (b - a) * (k + 1) / pieces;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            s += 0.5 * (hi - lo) * rule.weights[q] * f(0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.points[q]);
    }
    return s;
}

} // namespace

TEST_CASE("linear stiffness and mass on h = 1/4 match hand integration") {
    const auto space = SplineSpace::uniform(1, 1, 4);
    const auto k = assemble_stiffness(space);
    const auto m = assemble_mass(space);
    const double h = 0.25;
    for (std::size_t i = 1; i <= 3; ++i) {
        CHECK(k.at(i, i) == doctest::Approx(2.0 / h).epsilon(1e-13));
        CHECK(m.at(i, i) == doctest::Approx(2.0 * h / 3.0).epsilon(1e-13));
        if (i < 3) {
            CHECK(k.at(i, i + 1) == doctest::Approx(-1.0 / h).epsilon(1e-13));
            CHECK(m.at(i, i + 1) == doctest::Approx(h / 6.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("stiffness and mass are symmetric positive definite") {
    std::mt19937 gen(4);
    std::normal_distribution<double> n01;
    for (int dims : {1, 2})
        for (int p : {1, 2, 3}) {
            const auto space = SplineSpace::uniform(dims, p, dims == 1 ? 8 : 4);
            const auto layout = apply_dirichlet(space, std::nullopt);
            for (const auto& full : {assemble_stiffness(space), assemble_mass(space)}) {
                CHECK(symmetry_defect(full) <= 1e-12);
                const auto a = full.submatrix(layout.interior_indices, layout.interior_indices);
                CHECK(cholesky_succeeds(a));
                for (int t = 0; t < 100; ++t) {
                    linalg::Vector x(a.rows());
                    for (auto& v : x) v = n01(gen);
                    CHECK(linalg::dot(x, a.multiply(x)) > 0.0);
                }
            }
        }
}

TEST_CASE("2D operators are Kronecker sums of the 1D ones") {
    for (int p : {1, 2, 3}) {
        const auto s1 = SplineSpace::uniform(1, p, 4);
        const auto s2 = SplineSpace::uniform(2, p, 4);
        const auto k1 = assemble_stiffness(s1);
        const auto m1 = assemble_mass(s1);
        const auto k2 = assemble_stiffness(s2).to_dense();
        const auto m2 = assemble_mass(s2).to_dense();
        const auto kk = linalg::add(linalg::kron(k1, m1), linalg::kron(m1, k1)).to_dense();
        const auto mm = linalg::kron(m1, m1).to_dense();
        for (std::size_t i = 0; i < k2.rows(); ++i)
            for (std::size_t j = 0; j < k2.cols(); ++j) {
                CHECK(std::abs(k2(i, j) - kk(i, j)) <= 1e-12);
                CHECK(std::abs(m2(i, j) - mm(i, j)) <= 1e-12);
            }
    }
}

TEST_CASE("mass matrix integrates constants exactly") {
    for (int dims : {1, 2}) {
        const auto space = SplineSpace::uniform(dims, 3, 5);
        const auto m = assemble_mass(space);
        const linalg::Vector c(space.n_dof(), 2.5);
        CHECK(linalg::dot(c, m.multiply(c)) == doctest::Approx(6.25).epsilon(1e-12));
    }
}

TEST_CASE("bratu load vectors") {
    const auto space = SplineSpace::uniform(1, 3, 8);
    const SplineField zero(space);
    const ScalarFunction f0 = [](double, double) { return 0.0; };

    const auto l0 = assemble_bratu_rhs(space, 0.0, f0, zero);
    for (double v : l0) CHECK(v == 0.0);

    // lambda = 1, u = 0, f = 0: minus the mass row sums
    const auto l1 = assemble_bratu_rhs(space, 1.0, f0, zero);
    const auto m = assemble_mass(space);
    const auto rows = m.multiply(linalg::Vector(space.n_dof(), 1.0));
    for (std::size_t i = 0; i < l1.size(); ++i) CHECK(l1[i] == doctest::Approx(-rows[i]).epsilon(1e-13));

    // lambda = 0 is the plain Poisson load
    const ScalarFunction f = [](double x, double) { return kPi * kPi * std::sin(kPi * x); };
    const auto poisson = assemble_load(space, f);
    const auto bratu = assemble_bratu_rhs(space, 0.0, f, zero);
    for (std::size_t i = 0; i < poisson.size(); ++i) {
        CHECK(std::abs(poisson[i] - bratu[i]) <= 1e-13);
        const auto& kv = space.knots(0);
        const double oracle = integrate(
            [&](double x) {
                std::vector<double> e(space.n_dof(), 0.0);
                e[i] = 1.0;
                return f(x, 0.0) * bspline::eval_spline(kv, e, x);
            },
            0.0, 1.0, 64);
        // four Gauss points per span integrate sin only approximately
        CHECK(std::abs(poisson[i] - oracle) <= 1e-8);
    }

    SplineField big(space, linalg::Vector(space.n_dof(), 800.0));
    CHECK_THROWS_AS((void)assemble_bratu_rhs(space, 1.0, f0, big), Overflow);
}

TEST_CASE("field evaluation") {
    const auto space = SplineSpace::uniform(2, 3, 4);
    const SplineField ones(space, linalg::Vector(space.n_dof(), 1.0));
    for (double x : {0.0, 0.3, 1.0})
        for (double y : {0.0, 0.71, 1.0}) {
            const auto v = eval_field(ones, x, y);
            CHECK(v.value == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(std::abs(v.gradient[0]) < 1e-12);
            CHECK(std::abs(v.gradient[1]) < 1e-12);
        }
    const auto xy = l2_projection(space, [](double x, double y) { return x * y; });
    const auto v = eval_field(xy, 0.3, 0.6);
    CHECK(v.gradient[0] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(v.gradient[1] == doctest::Approx(0.3).epsilon(1e-9));

    const auto half_x2 = l2_projection(space, [](double x, double) { return 0.5 * x * x; });
    for (double x : {0.2, 0.5, 0.8}) CHECK(eval_field(half_x2, x, 0.4).hessian[0][0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK_THROWS_AS((void)eval_field(ones, 1.5, 0.5), OutOfDomain);
}

TEST_CASE("monge-ampere load") {
    const auto space = SplineSpace::uniform(2, 2, 4);
    const ScalarFunction one = [](double, double) { return 1.0; };
    const ScalarFunction zero_f = [](double, double) { return 0.0; };

    // Paraboloid: det H = 1 = f and G = Lap u = 2, so the load is -2 times the mass row sums.
    const auto para = l2_projection(space, [](double x, double y) { return 0.5 * (x * x + y * y); });
    const auto load = assemble_monge_ampere_rhs(space, one, para);
    const auto rows = assemble_mass(space).multiply(linalg::Vector(space.n_dof(), 1.0));
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(load.load[i] == doctest::Approx(-2.0 * rows[i]).epsilon(1e-9));
    CHECK(load.clamped_fraction == 0.0);

    const auto z = assemble_monge_ampere_rhs(space, zero_f, SplineField(space));
    for (double v : z.load) CHECK(v == 0.0);

    CHECK_THROWS_AS((void)assemble_monge_ampere_rhs(SplineSpace::uniform(2, 1, 4), one, SplineField(SplineSpace::uniform(2, 1, 4))),
                    DegreeTooLow);

    // Pointwise operator at the exact solution exp((x^2 + y^2)/2).
    for (double x : {0.1, 0.5, 0.9})
        for (double y : {0.2, 0.6}) {
            const double e = std::exp(0.5 * (x * x + y * y));
            const double uxx = (1 + x * x) * e, uyy = (1 + y * y) * e, uxy = x * y * e;
            const double f = (1 + x * x + y * y) * std::exp(x * x + y * y);
            CHECK(monge_ampere_operator(uxx + uyy, uxx * uyy - uxy * uxy, f) ==
                  doctest::Approx(uxx + uyy).epsilon(1e-10));
        }
    CHECK(monge_ampere_operator(0.0, 5.0, 0.0) == 0.0); // clamped radicand
}

TEST_CASE("dirichlet layouts") {
    const auto space = SplineSpace::uniform(2, 2, 4);
    const auto hom = apply_dirichlet(space, std::nullopt);
    CHECK(hom.interior_indices.size() + hom.boundary_indices.size() == space.n_dof());
    for (double v : hom.boundary_values) CHECK(v == 0.0);

    const auto ones = apply_dirichlet(space, ScalarFunction([](double, double) { return 1.0; }));
    for (double v : ones.boundary_values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));

    const linalg::Vector interior(ones.interior_indices.size(), 0.5);
    const auto full = ones.expand(interior);
    CHECK(ones.restrict_interior(full) == interior);

    // Lifted rhs with the zero load and g = 1: -A_IB g_B = A_II 1 since A 1 = 0.
    const auto sys = split_operator(assemble_stiffness(space), ones);
    const auto rhs = lifted_rhs(sys, ones, linalg::Vector(space.n_dof(), 0.0));
    const auto a1 = sys.a_ii.multiply(linalg::Vector(interior.size(), 1.0));
    for (std::size_t i = 0; i < rhs.size(); ++i) CHECK(rhs[i] == doctest::Approx(a1[i]).epsilon(1e-12));
}

TEST_CASE("boundary interpolation of the Monge-Ampere data converges") {
    auto g = [](double x, double y) { return std::exp(0.5 * (x * x + y * y)); };
    double prev = 0.0;
    for (std::size_t n : {8, 16, 32}) {
        const auto space = SplineSpace::uniform(2, 2, n);
        const auto layout = apply_dirichlet(space, ScalarFunction(g));
        const SplineField field(space, layout.expand(linalg::Vector(layout.interior_indices.size(), 0.0)));
        double worst = 0.0;
        for (int k = 0; k < 50; ++k) {
            const double s = (k + 0.5) / 50.0;
            for (auto [x, y] : {std::pair{s, 0.0}, {s, 1.0}, {0.0, s}, {1.0, s}})
                worst = std::max(worst, std::abs(eval_field(field, x, y).value - g(x, y)));
        }
        if (prev > 0.0) CHECK(prev / worst > 6.0); // order p + 1 = 3 would give 8
        CHECK(worst < 1e-3);
        prev = worst;
    }
}

TEST_CASE("l2 error and projection order") {
    const auto space = SplineSpace::uniform(2, 2, 3);
    const SplineField f(space, linalg::Vector(space.n_dof(), 0.0));
    CHECK(l2_error(f, [](double, double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-13));

    const auto s1 = SplineSpace::uniform(1, 3, 16);
    std::mt19937 gen(2);
    std::uniform_real_distribution<double> u(-1, 1);
    linalg::Vector c(s1.n_dof());
    for (auto& v : c) v = u(gen);
    const SplineField self(s1, c);
    const ScalarFunction same = [&](double x, double) { return bspline::eval_spline(s1.knots(0), c, x); };
    CHECK(l2_error(self, same) <= 1e-13);

    const ScalarFunction wave = [](double x, double) { return std::sin(2 * kPi * x); };
    double e16 = 0, e64 = 0;
    for (std::size_t n : {16, 64}) {
        const auto e = l2_error(l2_projection(SplineSpace::uniform(1, 3, n), wave), wave);
        (n == 16 ? e16 : e64) = e;
    }
    // 6.0e-8 here, below the (h/pi)^4 |u^(4)| bound of 6.7e-7
    CHECK(e64 <= 1e-7);
    CHECK(std::log(e16 / e64) / std::log(4.0) >= 3.0 + 0.7);
}
