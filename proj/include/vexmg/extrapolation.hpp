#pragma once

#include "vexmg/errors.hpp"
#include "vexmg/linalg/dense.hpp"

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

namespace vexmg::extrapolation {

using linalg::DenseMatrix;
using linalg::Vector;

enum class Method { mpe, rre };

/// Base iterate s_k and first differences Delta s_k .. Delta s_{k+q}.
struct IterateWindow {
    Vector base;
    DenseMatrix differences; ///< n x (q+1)

    /// Builds the window from the iterates s_k .. s_{k+q+1} (at least two).
    static IterateWindow from_iterates(const std::vector<Vector>& iterates);

    [[nodiscard]] std::size_t q() const noexcept { return differences.cols() - 1; }
    [[nodiscard]] std::size_t dim() const noexcept { return base.size(); }
    /// Column j is Delta s_{k+j+1} - Delta s_{k+j}; one fewer column than the differences.
    [[nodiscard]] DenseMatrix second_differences() const;
    /// s_{k+j} rebuilt from the base and the accumulated differences.
    [[nodiscard]] Vector iterate(std::size_t j) const;
};

struct ExtrapolationResult {
    Vector t;
    Vector gamma; ///< gamma_0 .. gamma_q, summing to one
    double generalized_residual_norm = 0.0;
    double lambda_shortcut = 0.0; ///< RRE normaliser 1 / sum(d); zero for MPE
};

/// Reduced rank extrapolation from a QR factorisation of the differences.
///
/// Throws RankDeficient{j} when difference column j < q is linearly dependent
/// on the earlier ones. A dependent last column means the sequence satisfies a
/// polynomial relation of degree q exactly; the extrapolant is then the exact
/// limit and the generalized residual is zero. Throws ZeroDenominator when the
/// coefficients sum to zero.
[[nodiscard]] ExtrapolationResult rre_extrapolate(const IterateWindow& w);

/// Minimal polynomial extrapolation, same error contract as RRE.
[[nodiscard]] ExtrapolationResult mpe_extrapolate(const IterateWindow& w);

[[nodiscard]] ExtrapolationResult extrapolate(const IterateWindow& w, Method method);

/// r = Delta s_k - D (Y^T D)^{-1} Y^T Delta s_k with D the second differences and
/// Y = D for RRE or the first q differences for MPE. Solved with a small dense LU,
/// independently of the QR route used by the extrapolation itself.
[[nodiscard]] Vector generalized_residual(const IterateWindow& w, Method method);

// ---------------------------------------------------------------------------
// fixed-point drivers

using FixedPointMap = std::function<Vector(const Vector&)>;
using VectorNorm = std::function<double(const Vector&)>;

/// Residual after one map evaluation: s is the argument, gs = G(s).
struct IterationRecord {
    std::size_t iter = 0;               ///< number of map evaluations so far
    double relative_residual = 0.0;     ///< ||G(s) - s|| / ||G(s)||
    double extrapolation_seconds = 0.0; ///< time spent accelerating since the previous record
};

using IterationObserver = std::function<void(const IterationRecord&, const Vector& gs)>;

struct FixedPointOptions {
    double tol = 1e-12;
    std::size_t maxiter = 1000;
    VectorNorm norm;             ///< Euclidean when empty
    IterationObserver observer;  ///< called after every map evaluation
    /// Diverged when the relative residual, or the step length measured
    /// against the first step, exceeds this.
    double divergence_threshold = 1e10;
};

struct FixedPointResult {
    Vector x;
    std::vector<IterationRecord> history;
    bool converged = false;
    std::size_t iterations = 0;
    double final_residual = 0.0;
    std::size_t rank_events = 0; ///< cycles that had to shrink their window
};

/// ||a - b|| / ||a|| in the given norm; the numerator alone when ||a|| is zero.
[[nodiscard]] double relative_change(const Vector& gs, const Vector& s, const VectorNorm& norm);

/// Plain iteration s <- G(s). Throws Diverged.
[[nodiscard]] FixedPointResult picard_solve(const FixedPointMap& g, Vector x0, const FixedPointOptions& opt);

/// Restarted MPE/RRE: each cycle evaluates G q+1 times from the current point
/// and restarts from the extrapolant. Throws Diverged.
[[nodiscard]] FixedPointResult restarted_solve(const FixedPointMap& g, Vector x0, Method method, std::size_t q,
                                               const FixedPointOptions& opt);

/// Anderson acceleration history of depth m in the unconstrained
/// least-squares form.
class AndersonState {
public:
    explicit AndersonState(std::size_t depth) : depth_(depth) {}

    [[nodiscard]] std::size_t depth() const noexcept { return depth_; }
    /// Number of difference columns currently used.
    [[nodiscard]] std::size_t columns() const noexcept { return f_.empty() ? 0 : f_.size() - 1; }
    /// theta of the last step (diagnostics).
    [[nodiscard]] const Vector& theta() const noexcept { return theta_; }
    /// Mixing weights beta_0 = theta_0, beta_i = theta_i - theta_{i-1}.
    [[nodiscard]] Vector beta() const;

    /// Records s_k and G(s_k) and returns the next iterate.
    [[nodiscard]] Vector step(const Vector& s_k, const Vector& g_sk);

private:
    std::size_t depth_;
    std::deque<Vector> f_;
    std::deque<Vector> g_;
    Vector theta_;
};

/// x_{k+1} = G(s_k) - G_k theta with theta minimising ||f_k - F_k theta||.
[[nodiscard]] inline Vector anderson_step(AndersonState& st, const Vector& s_k, const Vector& g_sk) {
    return st.step(s_k, g_sk);
}

/// Anderson-accelerated iteration with depth m. Throws Diverged.
[[nodiscard]] FixedPointResult anderson_solve(const FixedPointMap& g, Vector x0, std::size_t m,
                                              const FixedPointOptions& opt);

} // namespace vexmg::extrapolation
