#include "vexmg/nonlinear.hpp"

#include "vexmg/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

namespace vexmg::nonlinear {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector inner_initial_guess(const InnerConfig& inner, const Vector& warm) {
    return inner.start == InnerStart::warm ? warm : Vector(warm.size(), 0.0);
}

Vector inner_solve(const multigrid::GridHierarchy& hier, const Vector& b, Vector x0, const InnerConfig& inner,
                   PhaseTimes* times) {
    if (inner.kind == InnerSolve::one_vcycle) return multigrid::v_cycle(hier, b, x0, inner.smoother).x;
    double tol = inner.linear_tol;
    if (inner.tol_reference == InnerTolReference::initial_residual) {
        // solve_to_tolerance measures against ||b||; rescale so that the
        // test becomes ||b - A x|| <= tol ||b - A x0||.
        const double bnorm = linalg::norm2(b);
        if (bnorm > 0.0) {
            Vector r(b.size());
            hier.finest().a.residual_into(b, x0, r);
            tol *= linalg::norm2(r) / bnorm;
        }
        if (tol <= 0.0) return x0;
    }
    for (std::size_t k = 0; k < inner.min_cycles; ++k) x0 = multigrid::v_cycle(hier, b, x0, inner.smoother).x;
    const std::size_t remaining = inner.max_cycles > inner.min_cycles ? inner.max_cycles - inner.min_cycles : 0;
    auto res = multigrid::solve_to_tolerance(hier, b, x0, inner.smoother, tol, remaining);
    if (res.failure && times != nullptr) ++times->inner_failures;
    return std::move(res.x);
}

/// Shared outer loop over full coefficient vectors.
OuterResult drive(const SplineSpace& space, const extrapolation::FixedPointMap& g, Vector x0,
                  const std::optional<ScalarFunction>& exact, const OuterConfig& cfg, PhaseTimes& times) {
    OuterResult out(SplineField{space});
    const auto start = Clock::now();

    extrapolation::FixedPointOptions opt;
    opt.tol = cfg.tol;
    opt.maxiter = cfg.maxiter;
    if (cfg.mass_norm) {
        auto mass = std::make_shared<linalg::SparseMatrix>(iga::assemble_mass(space));
        opt.norm = [mass](const Vector& v) { return iga::mass_norm(*mass, v); };
    }
    double extrapol_total = 0.0;
    PhaseTimes last{};
    opt.observer = [&](const extrapolation::IterationRecord& rec, const Vector& gs) {
        HistoryRecord h;
        h.iter = rec.iter;
        h.relative_residual = rec.relative_residual;
        h.l2_error = kNaN;
        if (cfg.track_error && exact) h.l2_error = iga::l2_error(SplineField(space, gs), *exact);
        extrapol_total += rec.extrapolation_seconds;
        h.wall_s = seconds_since(start);
        h.rhs_s = times.rhs_s - last.rhs_s;
        h.mg_s = times.mg_s - last.mg_s;
        h.extrapol_s = rec.extrapolation_seconds;
        last = times;
        out.history.records.push_back(h);
    };

    extrapolation::FixedPointResult fp;
    try {
        switch (cfg.accelerator.kind) {
        case Accelerator::none:
            fp = extrapolation::picard_solve(g, std::move(x0), opt);
            break;
        case Accelerator::mpe:
            fp = extrapolation::restarted_solve(g, std::move(x0), extrapolation::Method::mpe, cfg.accelerator.depth, opt);
            break;
        case Accelerator::rre:
            fp = extrapolation::restarted_solve(g, std::move(x0), extrapolation::Method::rre, cfg.accelerator.depth, opt);
            break;
        case Accelerator::anderson:
            fp = extrapolation::anderson_solve(g, std::move(x0), cfg.accelerator.depth, opt);
            break;
        }
        out.status = fp.converged ? OuterStatus::converged : OuterStatus::max_iterations;
        out.solution.coefficients = std::move(fp.x);
    } catch (const Diverged& e) {
        out.status = OuterStatus::diverged;
        out.note = e.what();
    }
    out.iterations = out.history.records.size();
    out.final_residual = out.history.records.empty() ? kNaN : out.history.records.back().relative_residual;
    out.wall_s = seconds_since(start);
    out.rhs_s = times.rhs_s;
    out.mg_s = times.mg_s;
    out.extrapol_s = extrapol_total;
    out.inner_failures = times.inner_failures;
    out.l2_error = kNaN;
    if (exact && out.status != OuterStatus::diverged) out.l2_error = iga::l2_error(out.solution, *exact);
    if (out.inner_failures > 0 && out.note.empty())
        out.note = std::to_string(out.inner_failures) + " inner solves hit the cycle limit";
    return out;
}

} // namespace

BratuProblem BratuProblem::manufactured(int dims, double lambda, int degree, std::size_t n_elements, int k) {
    BratuProblem p{dims, lambda, {}, {}, SplineSpace::uniform(dims, degree, n_elements)};
    if (dims == 1) {
        const double w = 2.0 * k * std::numbers::pi;
        p.exact = [w](double x, double) { return std::sin(w * x); };
        p.f = [w, lambda](double x, double) {
            const double u = std::sin(w * x);
            return w * w * u + lambda * std::exp(u);
        };
    } else {
        p.exact = [](double x, double y) { return (x - x * x) * (y - y * y); };
        p.f = [lambda](double x, double y) {
            const double u = (x - x * x) * (y - y * y);
            return 2.0 * (y - y * y) + 2.0 * (x - x * x) + lambda * std::exp(u);
        };
    }
    return p;
}

MongeAmpereProblem MongeAmpereProblem::manufactured(int degree, std::size_t n_elements) {
    auto u = [](double x, double y) { return std::exp(0.5 * (x * x + y * y)); };
    MongeAmpereProblem p{[](double x, double y) {
                             const double r2 = x * x + y * y;
                             return (1.0 + r2) * std::exp(r2);
                         },
                         u, u, SplineSpace::uniform(2, degree, n_elements)};
    return p;
}

SplineField bratu_picard_map(const BratuProblem& prob, const multigrid::GridHierarchy& hier, const SplineField& u_n,
                             const InnerConfig& inner, PhaseTimes* times) {
    const auto t0 = Clock::now();
    Vector load;
    try {
        load = iga::assemble_bratu_rhs(prob.space, prob.lambda, prob.f, u_n);
    } catch (const Overflow& e) {
        throw Diverged(e.what());
    }
    const auto interior = prob.space.interior_indices();
    Vector b(interior.size());
    Vector warm(interior.size());
    for (std::size_t k = 0; k < interior.size(); ++k) {
        b[k] = load[interior[k]];
        warm[k] = u_n.coefficients[interior[k]];
    }
    const auto t1 = Clock::now();
    const Vector x = inner_solve(hier, b, inner_initial_guess(inner, warm), inner, times);
    if (times != nullptr) {
        times->rhs_s += std::chrono::duration<double>(t1 - t0).count();
        times->mg_s += seconds_since(t1);
    }
    SplineField out(prob.space);
    for (std::size_t k = 0; k < interior.size(); ++k) out.coefficients[interior[k]] = x[k];
    return out;
}

SplineField monge_ampere_picard_map(const MongeAmpereProblem& prob, const multigrid::GridHierarchy& hier,
                                    const iga::DirichletLayout& layout, const iga::InteriorSystem& sys,
                                    const SplineField& u_n,
                                    const InnerConfig& inner, PhaseTimes* times) {
    const auto t0 = Clock::now();
    const auto ma = iga::assemble_monge_ampere_rhs(prob.space, prob.f, u_n);
    const Vector b = iga::lifted_rhs(sys, layout, ma.load);
    const auto t1 = Clock::now();
    const Vector x = inner_solve(hier, b, inner_initial_guess(inner, layout.restrict_interior(u_n.coefficients)), inner, times);
    if (times != nullptr) {
        times->rhs_s += std::chrono::duration<double>(t1 - t0).count();
        times->mg_s += seconds_since(t1);
    }
    return SplineField(prob.space, layout.expand(x));
}

OuterResult run_outer(const BratuProblem& prob, const OuterConfig& cfg) {
    const auto hier = multigrid::build_hierarchy(
        prob.space, multigrid::default_level_count(prob.space, cfg.inner.direct_threshold), cfg.inner.coarsening);
    PhaseTimes times;
    const auto g = [&](const Vector& s) {
        return bratu_picard_map(prob, hier, SplineField(prob.space, s), cfg.inner, &times).coefficients;
    };
    Vector x0 = cfg.initial_guess ? *cfg.initial_guess : Vector(prob.space.n_dof(), 0.0);
    return drive(prob.space, g, std::move(x0), prob.exact, cfg, times);
}

OuterResult run_outer(const MongeAmpereProblem& prob, const OuterConfig& cfg) {
    const auto hier = multigrid::build_hierarchy(
        prob.space, multigrid::default_level_count(prob.space, cfg.inner.direct_threshold), cfg.inner.coarsening);
    const auto layout = iga::apply_dirichlet(prob.space, prob.g);
    const auto sys = iga::split_operator(iga::assemble_stiffness(prob.space), layout);
    PhaseTimes times;
    const auto g = [&](const Vector& s) {
        return monge_ampere_picard_map(prob, hier, layout, sys, SplineField(prob.space, s), cfg.inner, &times).coefficients;
    };
    Vector x0(prob.space.n_dof(), 0.0);
    if (cfg.initial_guess)
        x0 = *cfg.initial_guess;
    else if (cfg.lifted_initial_guess)
        x0 = layout.expand(Vector(layout.interior_indices.size(), 0.0));
    return drive(prob.space, g, std::move(x0), prob.exact, cfg, times);
}

} // namespace vexmg::nonlinear
