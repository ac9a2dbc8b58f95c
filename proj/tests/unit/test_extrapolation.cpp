#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vexmg/errors.hpp"
#include "vexmg/extrapolation.hpp"

#include <cmath>
#include <numeric>
#include <random>

using namespace vexmg;
using namespace vexmg::extrapolation;
using linalg::DenseMatrix;

namespace {

struct Affine {
    DenseMatrix m;
    Vector b;
    Vector operator()(const Vector& x) const {
        Vector y = m.multiply(x);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += b[i];
        return y;
    }
    // Oracle: (I - M)^{-1} b by dense LU.
    [[nodiscard]] Vector fixed_point() const {
        DenseMatrix a(m.rows(), m.cols());
        for (std::size_t i = 0; i < a.rows(); ++i)
            for (std::size_t j = 0; j < a.cols(); ++j) a(i, j) = (i == j ? 1.0 : 0.0) - m(i, j);
        return linalg::lu_solve_dense(a, b);
    }
};

// Random map with spectral radius well below one (row sums of |M| <= 0.6).
Affine random_affine(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Affine g{DenseMatrix(n, n), Vector(n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) g.m(i, j) = dist(gen) * 0.6 / static_cast<double>(n);
        g.b[i] = dist(gen);
    }
    return g;
}

std::vector<Vector> orbit(const Affine& g, Vector x, std::size_t count) {
    std::vector<Vector> s{x};
    for (std::size_t i = 1; i < count; ++i) s.push_back(g(s.back()));
    return s;
}

DenseMatrix gram(const DenseMatrix& a) { return a.transpose().multiply(a); }

// ||r||^2 * e^T (dS^T dS)^{-1} e, which equals one for RRE windows.
double residual_norm_identity(const IterateWindow& w) {
    const Vector r = generalized_residual(w, Method::rre);
    const Vector e(w.q() + 1, 1.0);
    const Vector d = linalg::lu_solve_dense(gram(w.differences), e);
    return linalg::dot(r, r) * std::accumulate(d.begin(), d.end(), 0.0);
}

void check_close(const Vector& a, const Vector& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol).scale(1.0));
}

} // namespace

TEST_CASE("window differences and rebuilt iterates") {
    const auto g = random_affine(5, 1);
    const auto s = orbit(g, Vector(5, 0.0), 5);
    const auto w = IterateWindow::from_iterates(s);
    CHECK(w.q() == 3);
    for (std::size_t j = 0; j < 4; ++j)
        for (std::size_t i = 0; i < 5; ++i) CHECK(w.differences(i, j) == s[j + 1][i] - s[j][i]);
    const auto d2 = w.second_differences();
    CHECK(d2.cols() == 3);
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < 5; ++i) CHECK(d2(i, j) == w.differences(i, j + 1) - w.differences(i, j));
    for (std::size_t j = 0; j < 5; ++j) check_close(w.iterate(j), s[j], 1e-14);
}

TEST_CASE("constant sequence is rank deficient") {
    const std::vector<Vector> s(4, Vector{1.0, 2.0, 3.0});
    const auto w = IterateWindow::from_iterates(s);
    CHECK_THROWS_AS((void)rre_extrapolate(w), RankDeficient);
    CHECK_THROWS_AS((void)mpe_extrapolate(w), RankDeficient);
    try {
        (void)rre_extrapolate(w);
    } catch (const RankDeficient& e) {
        CHECK(e.column() == 0);
    }
}

TEST_CASE("3x3 linear iteration with q = 3 is extrapolated exactly") {
    const auto g = random_affine(3, 2);
    const auto w = IterateWindow::from_iterates(orbit(g, Vector(3, 0.0), 5));
    const Vector x = g.fixed_point();
    for (Method m : {Method::rre, Method::mpe}) {
        const auto res = extrapolate(w, m);
        check_close(res.t, x, 1e-10);
        CHECK(std::accumulate(res.gamma.begin(), res.gamma.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(res.generalized_residual_norm <= 1e-10);
    }
}

TEST_CASE("MPE on diag(0.5, 0.2) with b = (1, 1) and q = 2 gives (2, 1.25)") {
    DenseMatrix m(2, 2);
    m(0, 0) = 0.5;
    m(1, 1) = 0.2;
    const Affine g{m, {1.0, 1.0}};
    const auto res = mpe_extrapolate(IterateWindow::from_iterates(orbit(g, Vector(2, 0.0), 4)));
    CHECK(res.t[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.t[1] == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("q = 0 returns the next iterate") {
    const std::vector<Vector> s{{0.0, 1.0}, {0.5, 2.0}};
    for (Method m : {Method::rre, Method::mpe}) {
        const auto res = extrapolate(IterateWindow::from_iterates(s), m);
        check_close(res.t, s[1], 1e-15);
        CHECK(res.gamma.size() == 1);
    }
}

TEST_CASE("RRE normaliser equals the squared pseudoinverse residual") {
    const auto g = random_affine(30, 3);
    const auto w = IterateWindow::from_iterates(orbit(g, Vector(30, 0.0), 6));
    const auto res = rre_extrapolate(w);

    // Oracle: r = ds0 - D D^+ ds0 with D^+ = (D^T D)^{-1} D^T for full-rank D.
    const DenseMatrix d = w.second_differences();
    Vector ds0(30);
    for (std::size_t i = 0; i < 30; ++i) ds0[i] = w.differences(i, 0);
    const Vector coef = linalg::lu_solve_dense(gram(d), d.multiply_transpose(ds0));
    const Vector r = linalg::subtract(ds0, d.multiply(coef));
    const double rn = linalg::norm2(r);
    CHECK(std::sqrt(res.lambda_shortcut) == doctest::Approx(rn).epsilon(1e-10));
    CHECK(res.generalized_residual_norm == doctest::Approx(rn).epsilon(1e-10));
    CHECK(linalg::norm2(generalized_residual(w, Method::rre)) == doctest::Approx(rn).epsilon(1e-10));
}

TEST_CASE("generalized residual orthogonality") {
    const auto g = random_affine(20, 4);
    const auto w = IterateWindow::from_iterates(orbit(g, Vector(20, 1.0), 5));
    const DenseMatrix d2 = w.second_differences();
    const Vector rr = generalized_residual(w, Method::rre);
    const Vector rm = generalized_residual(w, Method::mpe);
    const double scale = linalg::frobenius_norm(w.differences) * linalg::norm2(w.differences.col(0));
    for (std::size_t j = 0; j < d2.cols(); ++j) {
        CHECK(std::abs(linalg::dot(rr, d2.col(j))) <= 1e-12 * scale);
        CHECK(std::abs(linalg::dot(rm, w.differences.col(j))) <= 1e-12 * scale);
    }
    CHECK(linalg::norm2(rm) == doctest::Approx(mpe_extrapolate(w).generalized_residual_norm).epsilon(1e-9));
}

TEST_CASE("residual norm identity on random RRE windows") {
    std::mt19937 gen(5);
    std::normal_distribution<double> dist;
    for (int k = 0; k < 10; ++k) {
        std::vector<Vector> s(6, Vector(30));
        for (auto& v : s)
            for (auto& x : v) x = dist(gen);
        CHECK(residual_norm_identity(IterateWindow::from_iterates(s)) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("gamma sums to one and ignores a translation of the window") {
    const auto g = random_affine(12, 6);
    auto s = orbit(g, Vector(12, 0.5), 6);
    const auto w = IterateWindow::from_iterates(s);
    for (auto& v : s)
        for (auto& x : v) x += 3.0;
    const auto shifted = IterateWindow::from_iterates(s);
    for (Method m : {Method::rre, Method::mpe}) {
        const auto a = extrapolate(w, m);
        const auto b = extrapolate(shifted, m);
        CHECK(std::accumulate(a.gamma.begin(), a.gamma.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        check_close(a.gamma, b.gamma, 1e-12);
        for (std::size_t i = 0; i < a.t.size(); ++i) CHECK(b.t[i] == doctest::Approx(a.t[i] + 3.0).epsilon(1e-10));
    }
}

TEST_CASE("restarted drivers on simple maps") {
    FixedPointOptions opt;
    opt.tol = 1e-12;
    opt.maxiter = 50;

    SUBCASE("scalar contraction converges to 2 after one cycle") {
        const FixedPointMap g = [](const Vector& x) { return Vector{0.5 * x[0] + 1.0}; };
        for (Method m : {Method::rre, Method::mpe}) {
            const auto res = restarted_solve(g, {0.0}, m, 1, opt);
            CHECK(res.converged);
            CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-14));
            // Two map evaluations build the window; the third confirms the limit.
            CHECK(res.iterations == 3);
        }
    }
    SUBCASE("identity map returns the initial guess") {
        const FixedPointMap g = [](const Vector& x) { return x; };
        const Vector x0{1.0, -2.0, 3.0};
        const auto res = restarted_solve(g, x0, Method::mpe, 3, opt);
        CHECK(res.converged);
        CHECK(res.x == x0);
        CHECK(res.iterations == 1);
    }
    SUBCASE("affine map converges and every residual is recorded") {
        const auto a = random_affine(8, 7);
        const FixedPointMap g = [&](const Vector& x) { return a(x); };
        const auto res = restarted_solve(g, Vector(8, 0.0), Method::rre, 3, opt);
        CHECK(res.converged);
        CHECK(res.history.size() == res.iterations);
        for (std::size_t i = 0; i < res.history.size(); ++i) CHECK(res.history[i].iter == i + 1);
        check_close(res.x, a.fixed_point(), 1e-10);
    }
    SUBCASE("maxiter = 0 evaluates nothing") {
        opt.maxiter = 0;
        const FixedPointMap g = [](const Vector& x) { return Vector{0.5 * x[0] + 1.0}; };
        const auto res = restarted_solve(g, {0.0}, Method::rre, 2, opt);
        CHECK_FALSE(res.converged);
        CHECK(res.iterations == 0);
        CHECK(res.x[0] == 0.0);
    }
}

TEST_CASE("divergent map throws Diverged") {
    FixedPointOptions opt;
    opt.maxiter = 200;
    const FixedPointMap g = [](const Vector& x) { return Vector{3.0 * x[0] + 1.0, x[1]}; };
    CHECK_THROWS_AS((void)picard_solve(g, {1.0, 0.0}, opt), Diverged);
}

TEST_CASE("Anderson acceleration") {
    const FixedPointMap g = [](const Vector& x) { return Vector{0.5 * x[0] + 1.0}; };

    SUBCASE("first step is the plain map and depth one is exact on an affine scalar") {
        AndersonState st(1);
        const Vector x1 = st.step({0.0}, g({0.0}));
        CHECK(x1[0] == 1.0);
        const Vector x2 = st.step(x1, g(x1));
        CHECK(x2[0] == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(st.theta()[0] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(st.columns() == 1);
    }
    SUBCASE("depth zero reproduces Picard bit for bit") {
        const auto a = random_affine(6, 8);
        const FixedPointMap ga = [&](const Vector& x) { return a(x); };
        FixedPointOptions opt;
        opt.tol = 1e-10;
        std::vector<Vector> pic;
        std::vector<Vector> and0;
        opt.observer = [&](const IterationRecord&, const Vector& gs) { pic.push_back(gs); };
        const auto p = picard_solve(ga, Vector(6, 0.0), opt);
        opt.observer = [&](const IterationRecord&, const Vector& gs) { and0.push_back(gs); };
        const auto q = anderson_solve(ga, Vector(6, 0.0), 0, opt);
        CHECK(p.iterations == q.iterations);
        CHECK(pic == and0);
        CHECK(p.x == q.x);
    }
    SUBCASE("history is capped at the depth") {
        const auto a = random_affine(10, 9);
        AndersonState st(2);
        Vector x(10, 0.0);
        for (int k = 0; k < 6; ++k) {
            x = st.step(x, a(x));
            CHECK(st.columns() == std::min<std::size_t>(2, static_cast<std::size_t>(k)));
        }
        const Vector beta = st.beta();
        const Vector& th = st.theta();
        CHECK(beta[0] == th[0]);
        for (std::size_t i = 1; i < beta.size(); ++i) CHECK(beta[i] == doctest::Approx(th[i] - th[i - 1]));
    }
}
