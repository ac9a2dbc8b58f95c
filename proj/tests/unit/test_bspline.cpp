#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vexmg/bspline.hpp"
#include "vexmg/errors.hpp"

#include <cmath>
#include <random>

using namespace vexmg;
using namespace vexmg::bspline;

namespace {

// Literal Cox-de Boor recursion with the 0/0 := 0 convention; the oracle for
// the library's triangular evaluation.
double cox_de_boor(const std::vector<double>& t, std::size_t j, int p, double x) {
    if (p == 0) {
        const bool last = x == t.back() && t[j] < t[j + 1] && t[j + 1] == t.back();
        return (t[j] <= x && x < t[j + 1]) || last ? 1.0 : 0.0;
    }
    double v = 0.0;
    const double d1 = t[j + static_cast<std::size_t>(p)] - t[j];
    const double d2 = t[j + static_cast<std::size_t>(p) + 1] - t[j + 1];
    if (d1 > 0.0) v += (x - t[j]) / d1 * cox_de_boor(t, j, p - 1, x);
    if (d2 > 0.0) v += (t[j + static_cast<std::size_t>(p) + 1] - x) / d2 * cox_de_boor(t, j + 1, p - 1, x);
    return v;
}

} // namespace

TEST_CASE("open uniform knot vectors") {
    const auto k1 = make_open_uniform_knots(1, 2);
    CHECK(k1.knots() == std::vector<double>{0, 0, 0.5, 1, 1});
    CHECK(k1.n_basis() == 3);
    const auto k2 = make_open_uniform_knots(2, 4);
    CHECK(k2.knots() == std::vector<double>{0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1});
    CHECK(k2.n_basis() == 6);
    const auto k3 = make_open_uniform_knots(3, 1);
    CHECK(k3.knots() == std::vector<double>{0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(k3.n_basis() == 4);
    CHECK_THROWS_AS((void)make_open_uniform_knots(2, 4, 1.0, 1.0), InvalidInterval);
}

TEST_CASE("hat function interpolates at its knot") {
    const auto kv = make_open_uniform_knots(1, 2);
    const auto ev = eval_basis(kv, 0.5);
    // t = 0.5 lies in the second span; the middle hat is basis 1
    for (std::size_t a = 0; a < ev.values().size(); ++a) {
        const std::size_t i = ev.first_index() + a;
        CHECK(ev.values()[a] == doctest::Approx(i == 1 ? 1.0 : 0.0));
    }
}

TEST_CASE("quadratic basis at the midpoint of an interior span") {
    const auto kv = make_open_uniform_knots(2, 4);
    const auto ev = eval_basis(kv, 0.375);
    CHECK(ev.values()[0] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(ev.values()[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(ev.values()[2] == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("evaluation agrees with the literal recursion") {
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int p = 1; p <= 6; ++p) {
        const auto kv = make_open_uniform_knots(p, 5);
        for (int s = 0; s < 50; ++s) {
            const double x = u(gen);
            const auto ev = eval_basis(kv, x);
            for (std::size_t i = 0; i < kv.n_basis(); ++i) {
                const bool active = i >= ev.first_index() && i <= ev.span_index;
                const double lib = active ? ev.values()[i - ev.first_index()] : 0.0;
                CHECK(lib == doctest::Approx(cox_de_boor(kv.knots(), i, p, x)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("right endpoint belongs to the last span") {
    const auto kv = make_open_uniform_knots(3, 4);
    const auto ev = eval_basis(kv, 1.0);
    CHECK(ev.first_index() + 3 == kv.n_basis() - 1);
    CHECK(ev.values().back() == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)eval_basis(kv, 1.0 + 1e-9), OutOfDomain);
    CHECK_THROWS_AS((void)eval_basis(kv, -0.1), OutOfDomain);
}

TEST_CASE("spline derivatives of a cubic are exact") {
    // The coefficients of the Greville interpolant of x are the Greville
    // abscissae; the derivative is 1 and every higher derivative vanishes.
    const auto kv = make_open_uniform_knots(3, 6);
    std::vector<double> c(kv.n_basis());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = kv.greville(i);
    for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        CHECK(eval_spline(kv, c, x) == doctest::Approx(x).epsilon(1e-14));
        CHECK(eval_spline(kv, c, x, 1) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(eval_spline(kv, c, x, 2)) < 1e-11);
    }
}

TEST_CASE("refinement reproduces coarse splines and keeps row sums at one") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int p = 1; p <= 6; ++p) {
        const auto kv = make_open_uniform_knots(p, 4);
        const auto map = refine_dyadic(kv);
        CHECK(map.fine.n_elements() == 8);
        CHECK(map.matrix.rows() == map.fine.n_basis());
        CHECK(map.matrix.cols() == kv.n_basis());
        for (std::size_t i = 0; i < map.matrix.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < map.matrix.cols(); ++j) s += map.matrix.at(i, j);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
        std::vector<double> c(kv.n_basis());
        for (auto& v : c) v = u(gen);
        const auto fc = map.matrix.multiply(c);
        for (int k = 0; k <= 99; ++k) {
            const double x = k / 99.0;
            CHECK(std::abs(eval_spline(map.fine, fc, x) - eval_spline(kv, c, x)) <= 1e-12);
        }
    }
}

TEST_CASE("linear refinement is the one / half-half stencil") {
    const auto map = refine_dyadic(make_open_uniform_knots(1, 2));
    // fine hats at 0, .25, .5, .75, 1
    const double expected[5][3] = {{1, 0, 0}, {0.5, 0.5, 0}, {0, 1, 0}, {0, 0.5, 0.5}, {0, 0, 1}};
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(map.matrix.at(i, j) == doctest::Approx(expected[i][j]));
}

TEST_CASE("quadratic x^2 - x + 1 survives refinement") {
    // Interpolate at Greville points (exact for quadratics in a p = 2 space).
    const auto kv = make_open_uniform_knots(2, 2);
    auto f = [](double x) { return x * x - x + 1.0; };
    // Blossom of f for knots (t1, t2): t1 t2 - (t1 + t2)/2 + 1 gives the coefficients.
    const auto& t = kv.knots();
    std::vector<double> c(kv.n_basis());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = t[i + 1] * t[i + 2] - 0.5 * (t[i + 1] + t[i + 2]) + 1.0;
    const auto map = refine_dyadic(kv);
    const auto fc = map.matrix.multiply(c);
    for (int k = 0; k < 100; ++k) {
        const double x = k / 99.0;
        CHECK(eval_spline(kv, c, x) == doctest::Approx(f(x)).epsilon(1e-13));
        CHECK(eval_spline(map.fine, fc, x) == doctest::Approx(f(x)).epsilon(1e-12));
    }
}

TEST_CASE("gauss rules") {
    const auto r1 = gauss_rule(1, 0.0, 1.0);
    CHECK(r1.points[0] == doctest::Approx(0.5));
    CHECK(r1.weights[0] == doctest::Approx(1.0));
    const auto r2 = gauss_rule(2);
    CHECK(std::abs(r2.points[0]) == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(r2.points[0] == doctest::Approx(-r2.points[1]));
    CHECK(r2.weights[0] == doctest::Approx(1.0));
    CHECK(r2.weights[1] == doctest::Approx(1.0));
    const auto r3 = gauss_rule(3, 0.0, 1.0);
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) s += r3.weights[i] * std::pow(r3.points[i], 5);
    CHECK(std::abs(s - 1.0 / 6.0) <= 1e-15);
    for (int n = 1; n <= 16; ++n) {
        const auto r = gauss_rule(n, 0.2, 0.7);
        double w = 0.0, m = 0.0;
        for (std::size_t i = 0; i < r.points.size(); ++i) {
            w += r.weights[i];
            m += r.weights[i] * std::pow(r.points[i], 2 * n - 1);
        }
        CHECK(w == doctest::Approx(0.5).epsilon(1e-14));
        const double exact = (std::pow(0.7, 2 * n) - std::pow(0.2, 2 * n)) / (2 * n);
        CHECK(m == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK_THROWS_AS((void)gauss_rule(0), UnsupportedOrder);
    CHECK_THROWS_AS((void)gauss_rule(17), UnsupportedOrder);
}
