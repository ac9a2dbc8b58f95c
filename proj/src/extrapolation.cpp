#include "vexmg/extrapolation.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace vexmg::extrapolation {

using linalg::IncrementalQR;

IterateWindow IterateWindow::from_iterates(const std::vector<Vector>& iterates) {
    assert(iterates.size() >= 2);
    IterateWindow w;
    w.base = iterates.front();
    w.differences = DenseMatrix(w.base.size(), 0);
    for (std::size_t j = 0; j + 1 < iterates.size(); ++j) w.differences.append_column(linalg::subtract(iterates[j + 1], iterates[j]));
    return w;
}

DenseMatrix IterateWindow::second_differences() const {
    DenseMatrix d2(dim(), q());
    for (std::size_t j = 0; j < q(); ++j)
        for (std::size_t i = 0; i < dim(); ++i) d2(i, j) = differences(i, j + 1) - differences(i, j);
    return d2;
}

Vector IterateWindow::iterate(std::size_t j) const {
    Vector s = base;
    for (std::size_t c = 0; c < j; ++c) linalg::axpy(1.0, differences.col(c), s);
    return s;
}

namespace {

/// Factorisation of the difference columns, or the null vector exposed by a
/// dependent last column.
struct WindowFactors {
    IncrementalQR qr;
    bool terminating = false;
    Vector null_vector; ///< d with Delta S d = 0 and d_q = 1 (terminating case)
};

WindowFactors factor_window(const IterateWindow& w) {
    const std::size_t q = w.q();
    WindowFactors f{IncrementalQR(w.dim()), false, {}};
    for (std::size_t j = 0; j <= q; ++j) {
        if (f.qr.append(w.differences.col(j))) continue;
        if (j < q || j == 0) throw RankDeficient(j);
        // Delta s_{k+q} = Q_q c: the window satisfies sum d_j Delta s_{k+j} = 0 exactly
        const Vector y = linalg::solve_upper_triangular(f.qr.r(), f.qr.rejected_coefficients());
        f.null_vector.assign(q + 1, 1.0);
        for (std::size_t i = 0; i < q; ++i) f.null_vector[i] = -y[i];
        f.terminating = true;
    }
    return f;
}

Vector normalise(const Vector& d) {
    const double sum = std::accumulate(d.begin(), d.end(), 0.0);
    double scale = 0.0;
    for (double v : d) scale = std::max(scale, std::abs(v));
    if (sum == 0.0 || std::abs(sum) <= 1e-14 * scale || !std::isfinite(sum)) throw ZeroDenominator("sum of extrapolation weights vanishes");
    Vector gamma(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) gamma[i] = d[i] / sum;
    return gamma;
}

/// t = s_k + sum_{j<q} alpha_j Delta s_{k+j} with alpha_j = 1 - (gamma_0 + ... + gamma_j).
Vector extrapolant(const IterateWindow& w, const Vector& gamma) {
    Vector t = w.base;
    double partial = 0.0;
    for (std::size_t j = 0; j + 1 < gamma.size(); ++j) {
        partial += gamma[j];
        linalg::axpy(1.0 - partial, w.differences.col(j), t);
    }
    return t;
}

ExtrapolationResult degenerate_window(const IterateWindow& w) {
    ExtrapolationResult out;
    out.t = w.iterate(1);
    out.gamma = {1.0};
    out.generalized_residual_norm = linalg::norm2(w.differences.col(0));
    return out;
}

/// ||R gamma||, the norm of Delta S gamma.
double window_residual_norm(const IncrementalQR& qr, const Vector& gamma) {
    const DenseMatrix r = qr.r();
    return linalg::norm2(r.multiply(gamma));
}

} // namespace

ExtrapolationResult rre_extrapolate(const IterateWindow& w) {
    if (w.q() == 0) {
        if (linalg::norm2(w.differences.col(0)) == 0.0) throw RankDeficient(0);
        return degenerate_window(w);
    }
    auto f = factor_window(w);
    ExtrapolationResult out;
    if (f.terminating) {
        out.gamma = normalise(f.null_vector);
        out.t = extrapolant(w, out.gamma);
        return out;
    }
    const DenseMatrix r = f.qr.r();
    const Vector e(w.q() + 1, 1.0);
    const Vector d = linalg::solve_normal_equations(r, e);
    out.gamma = normalise(d);
    out.lambda_shortcut = 1.0 / std::accumulate(d.begin(), d.end(), 0.0);
    out.generalized_residual_norm = std::sqrt(std::max(0.0, out.lambda_shortcut));
    out.t = extrapolant(w, out.gamma);
    return out;
}

ExtrapolationResult mpe_extrapolate(const IterateWindow& w) {
    if (w.q() == 0) {
        if (linalg::norm2(w.differences.col(0)) == 0.0) throw RankDeficient(0);
        return degenerate_window(w);
    }
    auto f = factor_window(w);
    ExtrapolationResult out;
    if (f.terminating) {
        out.gamma = normalise(f.null_vector);
        out.t = extrapolant(w, out.gamma);
        return out;
    }
    const std::size_t q = w.q();
    const DenseMatrix r = f.qr.r();
    const DenseMatrix rq = r.column_block(0, q);
    DenseMatrix rq_square(q, q);
    Vector rhs(q);
    for (std::size_t i = 0; i < q; ++i) {
        for (std::size_t j = 0; j < q; ++j) rq_square(i, j) = rq(i, j);
        rhs[i] = -r(i, q);
    }
    Vector d = linalg::solve_upper_triangular(rq_square, rhs);
    d.push_back(1.0);
    out.gamma = normalise(d);
    out.generalized_residual_norm = window_residual_norm(f.qr, out.gamma);
    out.t = extrapolant(w, out.gamma);
    return out;
}

ExtrapolationResult extrapolate(const IterateWindow& w, Method method) {
    return method == Method::rre ? rre_extrapolate(w) : mpe_extrapolate(w);
}

Vector generalized_residual(const IterateWindow& w, Method method) {
    (void)linalg::qr_factor(w.differences); // full-rank precondition, throws RankDeficient
    const std::size_t q = w.q();
    Vector ds0(w.differences.col(0).begin(), w.differences.col(0).end());
    if (q == 0) return ds0;
    const DenseMatrix d2 = w.second_differences();
    const DenseMatrix y = method == Method::rre ? d2 : w.differences.column_block(0, q);
    const DenseMatrix yt = y.transpose();
    const Vector xi = linalg::lu_solve_dense(yt.multiply(d2), yt.multiply(ds0));
    const Vector correction = d2.multiply(xi);
    linalg::axpy(-1.0, correction, ds0);
    return ds0;
}

// ---------------------------------------------------------------------------
// drivers

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double apply_norm(const VectorNorm& norm, const Vector& v) { return norm ? norm(v) : linalg::norm2(v); }

/// Shared bookkeeping: evaluates G, records the residual, checks the stopping rules.
class Evaluator {
public:
    Evaluator(const FixedPointMap& g, const FixedPointOptions& opt, FixedPointResult& out)
        : g_(g), opt_(opt), out_(out) {}

    [[nodiscard]] bool exhausted() const { return out_.iterations >= opt_.maxiter; }

    /// Returns G(s); sets `done` when the tolerance is met.
    Vector evaluate(const Vector& s, bool& done) {
        Vector gs = g_(s);
        ++out_.iterations;
        const double step = apply_norm(opt_.norm, linalg::subtract(gs, s));
        const double den = apply_norm(opt_.norm, gs);
        const double res = den > 0.0 ? step / den : step;
        if (first_step_ < 0.0) first_step_ = step;
        IterationRecord rec{out_.iterations, res, pending_extrapolation_};
        pending_extrapolation_ = 0.0;
        out_.history.push_back(rec);
        out_.final_residual = res;
        if (opt_.observer) opt_.observer(rec, gs);
        // The relative residual stays bounded under geometric blow-up, so the
        // step length is also compared with the first one.
        const bool runaway = first_step_ > 0.0 && step > opt_.divergence_threshold * first_step_;
        if (!std::isfinite(res) || !std::isfinite(den) || res > opt_.divergence_threshold || runaway)
            throw Diverged("fixed-point residual " + std::to_string(res) + " after " + std::to_string(out_.iterations) +
                           " iterations");
        done = res <= opt_.tol;
        if (done) out_.converged = true;
        return gs;
    }

    void add_extrapolation_time(double s) { pending_extrapolation_ += s; }

private:
    const FixedPointMap& g_;
    const FixedPointOptions& opt_;
    FixedPointResult& out_;
    double pending_extrapolation_ = 0.0;
    double first_step_ = -1.0;
};

} // namespace

double relative_change(const Vector& gs, const Vector& s, const VectorNorm& norm) {
    const double num = apply_norm(norm, linalg::subtract(gs, s));
    const double den = apply_norm(norm, gs);
    return den > 0.0 ? num / den : num;
}

FixedPointResult picard_solve(const FixedPointMap& g, Vector x0, const FixedPointOptions& opt) {
    FixedPointResult out;
    Evaluator ev(g, opt, out);
    Vector x = std::move(x0);
    while (!ev.exhausted()) {
        bool done = false;
        x = ev.evaluate(x, done);
        if (done) break;
    }
    out.x = std::move(x);
    return out;
}

FixedPointResult restarted_solve(const FixedPointMap& g, Vector x0, Method method, std::size_t q,
                                 const FixedPointOptions& opt) {
    assert(q >= 1);
    FixedPointResult out;
    Evaluator ev(g, opt, out);
    Vector x = std::move(x0);
    while (!ev.exhausted()) {
        std::vector<Vector> iterates{x};
        bool done = false;
        for (std::size_t i = 0; i <= q && !done && !ev.exhausted(); ++i) iterates.push_back(ev.evaluate(iterates.back(), done));
        if (done || ev.exhausted()) {
            out.x = iterates.back();
            return out;
        }
        const auto t0 = Clock::now();
        std::size_t qc = q;
        for (;;) {
            if (qc == 0) {
                x = iterates[1];
                break;
            }
            iterates.resize(qc + 2);
            try {
                x = extrapolate(IterateWindow::from_iterates(iterates), method).t;
                break;
            } catch (const RankDeficient& e) {
                // columns before e.column() are independent; that shorter window ends in a dependent column
                ++out.rank_events;
                qc = e.column();
            } catch (const SingularTriangular& e) {
                ++out.rank_events;
                qc = std::min(qc - 1, e.index());
            } catch (const ZeroDenominator&) {
                ++out.rank_events;
                qc -= 1;
            }
        }
        ev.add_extrapolation_time(seconds_since(t0));
    }
    out.x = std::move(x);
    return out;
}

Vector AndersonState::beta() const {
    Vector b(theta_.size());
    for (std::size_t i = 0; i < theta_.size(); ++i) b[i] = i == 0 ? theta_[0] : theta_[i] - theta_[i - 1];
    return b;
}

Vector AndersonState::step(const Vector& s_k, const Vector& g_sk) {
    f_.push_back(linalg::subtract(g_sk, s_k));
    g_.push_back(g_sk);
    while (f_.size() > depth_ + 1) {
        f_.pop_front();
        g_.pop_front();
    }
    theta_.clear();
    while (f_.size() > 1) {
        IncrementalQR qr(s_k.size());
        bool full_rank = true;
        for (std::size_t j = 0; j + 1 < f_.size() && full_rank; ++j) full_rank = qr.append(linalg::subtract(f_[j + 1], f_[j]));
        if (full_rank) {
            try {
                theta_ = qr.least_squares(f_.back());
                break;
            } catch (const SingularTriangular&) {
            }
        }
        f_.pop_front();
        g_.pop_front();
    }
    Vector x = g_sk;
    for (std::size_t j = 0; j < theta_.size(); ++j) {
        const Vector dg = linalg::subtract(g_[j + 1], g_[j]);
        linalg::axpy(-theta_[j], dg, x);
    }
    return x;
}

FixedPointResult anderson_solve(const FixedPointMap& g, Vector x0, std::size_t m, const FixedPointOptions& opt) {
    FixedPointResult out;
    Evaluator ev(g, opt, out);
    AndersonState st(m);
    Vector s = std::move(x0);
    while (!ev.exhausted()) {
        bool done = false;
        Vector gs = ev.evaluate(s, done);
        if (done || ev.exhausted()) {
            out.x = std::move(gs);
            return out;
        }
        const auto t0 = Clock::now();
        s = st.step(s, gs);
        ev.add_extrapolation_time(seconds_since(t0));
    }
    out.x = std::move(s);
    return out;
}

} // namespace vexmg::extrapolation
