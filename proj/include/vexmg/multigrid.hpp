#pragma once

#include "vexmg/errors.hpp"
#include "vexmg/iga.hpp"
#include "vexmg/linalg/dense.hpp"
#include "vexmg/linalg/sparse.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace vexmg::multigrid {

using linalg::SparseMatrix;
using linalg::Vector;

enum class Coarsening { galerkin, rediscretize };

/// Coarsest level is solved directly once it has at most this many interior
/// dof per direction.
inline constexpr std::size_t kDirectSolveThreshold = 16;

/// One grid level. All operators act on interior (Dirichlet-eliminated) dof.
struct Level {
    iga::SplineSpace space;
    SparseMatrix a;
    SparseMatrix p; ///< prolongation to the next finer level (empty on the finest)
    SparseMatrix r; ///< p transposed
    Vector inv_diag;
};

/// Levels ordered coarse to fine. Immutable after construction.
class GridHierarchy {
public:
    GridHierarchy(std::vector<Level> levels, Coarsening coarsening);

    [[nodiscard]] std::size_t size() const noexcept { return levels_.size(); }
    [[nodiscard]] const Level& level(std::size_t i) const { return levels_[i]; }
    [[nodiscard]] const Level& finest() const { return levels_.back(); }
    [[nodiscard]] const Level& coarsest() const { return levels_.front(); }
    [[nodiscard]] std::size_t n_interior() const { return finest().a.rows(); }
    [[nodiscard]] Coarsening coarsening() const noexcept { return coarsening_; }
    [[nodiscard]] const linalg::DenseLU& coarse_solver() const noexcept { return coarse_lu_; }

private:
    std::vector<Level> levels_;
    Coarsening coarsening_;
    linalg::DenseLU coarse_lu_;
};

/// Prolongation between nested uniform spaces restricted to interior dof.
[[nodiscard]] SparseMatrix interior_prolongation(const iga::SplineSpace& coarse, const iga::SplineSpace& fine);

/// Number of levels obtained by halving until the interior size per direction
/// drops to the direct-solve threshold or the element count becomes odd.
[[nodiscard]] std::size_t default_level_count(const iga::SplineSpace& fine,
                                              std::size_t threshold = kDirectSolveThreshold);

/// Throws TooCoarse when a level would have no interior dof or an odd element count.
[[nodiscard]] GridHierarchy build_hierarchy(const iga::SplineSpace& fine, std::size_t n_levels,
                                            Coarsening coarsening = Coarsening::galerkin);
[[nodiscard]] GridHierarchy build_hierarchy(const iga::SplineSpace& fine,
                                            Coarsening coarsening = Coarsening::galerkin);

struct SmootherConfig {
    double omega = 2.0 / 3.0;
    int nu1 = 1;
    int nu2 = 1;
};

struct CycleReport {
    double initial_residual_norm = 0.0;
    double final_residual_norm = 0.0;
    std::size_t levels_visited = 0;
    std::size_t cycles = 0;
};

/// Weighted Jacobi, x <- x + omega D^{-1} (b - A x), `sweeps` times. Throws ZeroDiagonal.
[[nodiscard]] Vector smooth(const SparseMatrix& a, std::span<const double> b, std::span<const double> x,
                            const SmootherConfig& cfg, int sweeps);

struct CycleResult {
    Vector x;
    CycleReport report;
};

/// One V(nu1, nu2) cycle on the finest level.
[[nodiscard]] CycleResult v_cycle(const GridHierarchy& h, std::span<const double> b, std::span<const double> x0,
                                  const SmootherConfig& cfg = {});

/// Two-grid cycle between the finest level and the next coarser one, with an
/// exact coarse solve. Requires at least two levels.
[[nodiscard]] CycleResult two_grid(const GridHierarchy& h, std::span<const double> b, std::span<const double> x0,
                                   const SmootherConfig& cfg = {});

struct SolveResult {
    Vector x;
    CycleReport report;
    bool converged = false;
    /// Set when maxiter cycles did not reach the tolerance.
    std::optional<MaxIterExceeded> failure;
};

/// Repeats V-cycles until ||b - A x|| / ||b|| <= tol or maxiter cycles.
[[nodiscard]] SolveResult solve_to_tolerance(const GridHierarchy& h, std::span<const double> b,
                                             std::span<const double> x0, const SmootherConfig& cfg, double tol,
                                             std::size_t maxiter);

} // namespace vexmg::multigrid
