#pragma once

#include "vexmg/extrapolation.hpp"
#include "vexmg/iga.hpp"
#include "vexmg/multigrid.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vexmg::nonlinear {

using iga::ScalarFunction;
using iga::SplineField;
using iga::SplineSpace;
using linalg::Vector;

/// -Lap u + lambda e^u = f with homogeneous Dirichlet data.
struct BratuProblem {
    int dims = 1;
    double lambda = 0.0;
    ScalarFunction f;
    std::optional<ScalarFunction> exact;
    SplineSpace space;

    /// 1D: u = sin(2 k pi x). 2D: u = (x - x^2)(y - y^2). f chosen to match.
    static BratuProblem manufactured(int dims, double lambda, int degree, std::size_t n_elements, int k = 1);
};

/// det H(u) = f in the unit square with u = g on the boundary.
struct MongeAmpereProblem {
    ScalarFunction f;
    ScalarFunction g;
    std::optional<ScalarFunction> exact;
    SplineSpace space;

    /// u = exp((x^2 + y^2) / 2), f = (1 + x^2 + y^2) exp(x^2 + y^2), g the trace of u.
    static MongeAmpereProblem manufactured(int degree, std::size_t n_elements);
};

enum class Accelerator { none, mpe, rre, anderson };

struct AcceleratorSpec {
    Accelerator kind = Accelerator::none;
    std::size_t depth = 0; ///< restart q for MPE/RRE, history m for Anderson
};

enum class InnerSolve { one_vcycle, vcycle_to_tol };

enum class InnerStart { warm, cold };

/// What the inner tolerance is relative to: ||b|| or the residual of the
/// inner initial guess. They coincide for a cold start.
enum class InnerTolReference { rhs, initial_residual };

struct InnerConfig {
    InnerSolve kind = InnerSolve::one_vcycle;
    double linear_tol = 1e-2;
    std::size_t max_cycles = 500;
    /// V-cycles always applied before the tolerance test. With a warm start and
    /// no forced cycle, a loose tolerance can leave the iterate untouched and
    /// stall the outer loop at a non-solution.
    std::size_t min_cycles = 1;
    /// Initial guess of the inner linear solve: previous outer iterate or zero.
    InnerStart start = InnerStart::warm;
    InnerTolReference tol_reference = InnerTolReference::rhs;
    multigrid::SmootherConfig smoother;
    multigrid::Coarsening coarsening = multigrid::Coarsening::galerkin;
    /// Interior dof per direction below which the coarsest level is solved directly.
    std::size_t direct_threshold = multigrid::kDirectSolveThreshold;
};

struct OuterConfig {
    AcceleratorSpec accelerator;
    double tol = 1e-12;
    std::size_t maxiter = 1000;
    InnerConfig inner;
    /// Measure the outer residual in the mass-weighted function norm instead of
    /// the Euclidean coefficient norm.
    bool mass_norm = false;
    /// Evaluate the L2 error after every iteration (otherwise only at the end).
    bool track_error = false;
    /// Full coefficient vector; all zeros when empty.
    std::optional<Vector> initial_guess;
    /// Start Monge-Ampere from zero interior coefficients plus the boundary
    /// data instead of the all-zero vector. The all-zero start has a vanishing
    /// Hessian, so the first step solves Lap u = sqrt(2 f) with u = g, which
    /// avoids the clamped-radicand phase the lifted start goes through.
    bool lifted_initial_guess = false;
};

struct HistoryRecord {
    std::size_t iter = 0;
    double relative_residual = 0.0;
    double l2_error = 0.0; ///< NaN when not evaluated
    double wall_s = 0.0;   ///< cumulative
    double rhs_s = 0.0;
    double mg_s = 0.0;
    double extrapol_s = 0.0;
};

struct IterationHistory {
    std::vector<HistoryRecord> records;
};

enum class OuterStatus { converged, max_iterations, diverged };

struct OuterResult {
    explicit OuterResult(SplineField s) : solution(std::move(s)) {}

    SplineField solution;
    IterationHistory history;
    OuterStatus status = OuterStatus::max_iterations;
    std::size_t iterations = 0;
    double final_residual = 0.0;
    double l2_error = 0.0; ///< NaN without an exact solution
    double wall_s = 0.0;
    double rhs_s = 0.0;
    double mg_s = 0.0;
    double extrapol_s = 0.0;
    std::size_t inner_failures = 0; ///< inner solves that hit their cycle limit
    std::string note;

    [[nodiscard]] bool converged() const noexcept { return status == OuterStatus::converged; }
};

/// Phase timers filled by the Picard maps.
struct PhaseTimes {
    double rhs_s = 0.0;
    double mg_s = 0.0;
    std::size_t inner_failures = 0;
};

/// One Picard step: assemble f - lambda e^{u_n}, then a single warm- or
/// cold-started V-cycle (or a solve to tolerance). Throws Diverged on exp overflow.
[[nodiscard]] SplineField bratu_picard_map(const BratuProblem& prob, const multigrid::GridHierarchy& hier,
                                           const SplineField& u_n, const InnerConfig& inner,
                                           PhaseTimes* times = nullptr);

/// One Picard step of Lap u_{n+1} = G(u_n) with the boundary lift of g;
/// `sys` supplies the interior/boundary coupling used by the lift.
[[nodiscard]] SplineField monge_ampere_picard_map(const MongeAmpereProblem& prob,
                                                  const multigrid::GridHierarchy& hier,
                                                  const iga::DirichletLayout& layout, const iga::InteriorSystem& sys,
                                                  const SplineField& u_n,
                                                  const InnerConfig& inner, PhaseTimes* times = nullptr);

/// Runs the accelerated outer loop. Non-convergence and divergence are
/// reported through the status instead of being thrown, so sweeps keep the
/// partial history.
[[nodiscard]] OuterResult run_outer(const BratuProblem& prob, const OuterConfig& cfg);
[[nodiscard]] OuterResult run_outer(const MongeAmpereProblem& prob, const OuterConfig& cfg);

} // namespace vexmg::nonlinear
