#include "vexmg/bench.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace vexmg::bench {

nonlinear::OuterConfig outer_config_for(const ExperimentConfig& cfg, const Cell& cell) {
    nonlinear::OuterConfig oc;
    oc.tol = cfg.tol;
    oc.maxiter = cfg.maxiter;
    oc.mass_norm = cfg.mass_norm;
    oc.track_error = true;
    oc.lifted_initial_guess = cfg.lifted_initial_guess;
    oc.inner = cfg.inner;
    oc.inner.linear_tol = cfg.inner_tol_for(cell.degree, cell.grid);
    using Kind = MethodSpec::Kind;
    switch (cell.method.kind) {
    case Kind::picard: oc.accelerator = {nonlinear::Accelerator::none, 0}; break;
    case Kind::picard_slu:
        oc.accelerator = {nonlinear::Accelerator::none, 0};
        // A single level makes every inner solve the cached dense LU.
        oc.inner.direct_threshold = std::numeric_limits<std::size_t>::max();
        break;
    case Kind::mpe: oc.accelerator = {nonlinear::Accelerator::mpe, cell.method.depth}; break;
    case Kind::rre: oc.accelerator = {nonlinear::Accelerator::rre, cell.method.depth}; break;
    case Kind::aa: oc.accelerator = {nonlinear::Accelerator::anderson, cell.method.depth}; break;
    }
    return oc;
}

CellOutcome run_cell(const ExperimentConfig& cfg, const Cell& cell) {
    CellOutcome out;
    ResultRow& row = out.row;
    row.problem = to_string(cfg.problem);
    row.method = cell.method.token();
    row.lambda = cell.lambda;
    row.p = cell.degree;
    row.h = 1.0 / static_cast<double>(cell.grid);
    row.relative_residual = std::numeric_limits<double>::quiet_NaN();
    row.l2_err = std::numeric_limits<double>::quiet_NaN();
    try {
        const auto oc = outer_config_for(cfg, cell);
        auto result = [&] {
            switch (cfg.problem) {
            case Problem::bratu1d:
            case Problem::bratu2d: {
                const int dims = cfg.problem == Problem::bratu1d ? 1 : 2;
                const auto prob =
                    nonlinear::BratuProblem::manufactured(dims, cell.lambda, cell.degree, cell.grid, cfg.wave_number);
                return nonlinear::run_outer(prob, oc);
            }
            case Problem::monge_ampere:
                return nonlinear::run_outer(nonlinear::MongeAmpereProblem::manufactured(cell.degree, cell.grid), oc);
            }
            throw std::logic_error("unhandled problem");
        }();
        row.iter = result.iterations;
        row.relative_residual = result.final_residual;
        row.l2_err = result.l2_error;
        row.cpu_s = result.wall_s;
        row.rhs_time_s = result.rhs_s;
        row.mg_time_s = result.mg_s;
        row.extrapol_time_s = result.extrapol_s;
        row.converged = result.converged();
        row.note = result.note;
        if (result.status == nonlinear::OuterStatus::diverged && row.note.empty()) row.note = "diverged";
        out.history = std::move(result.history);
    } catch (const std::exception& e) {
        row.converged = false;
        row.note = std::string(kCellErrorPrefix) + e.what();
    }
    return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, unsigned threads,
                                      std::vector<nonlinear::IterationHistory>* histories) {
    const auto cells = enumerate_cells(cfg);
    std::vector<CellOutcome> outcomes(cells.size());
    if (threads <= 1 || cells.size() <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) outcomes[i] = run_cell(cfg, cells[i]);
    } else {
        // Each worker owns whole cells; results land in their declaration slot.
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        const unsigned n = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
        for (unsigned t = 0; t < n; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) outcomes[i] = run_cell(cfg, cells[i]);
            });
    }
    std::vector<ResultRow> rows;
    rows.reserve(outcomes.size());
    if (histories) histories->clear();
    for (auto& o : outcomes) {
        rows.push_back(std::move(o.row));
        if (histories) histories->push_back(std::move(o.history));
    }
    return rows;
}

} // namespace vexmg::bench
