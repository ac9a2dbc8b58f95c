#pragma once

#include "vexmg/nonlinear.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vexmg::bench {

enum class Problem { bratu1d, bratu2d, monge_ampere };

[[nodiscard]] std::string to_string(Problem p);

/// One outer method of a sweep. `picard_slu` is plain Picard with an exact
/// (dense LU) inner solve instead of the V-cycle.
struct MethodSpec {
    enum class Kind { picard, picard_slu, mpe, rre, aa };
    Kind kind = Kind::picard;
    std::size_t depth = 0;

    /// Parses "picard", "picard_slu", "mpe(5)", "rre(8)", "aa(3)".
    static MethodSpec parse(const std::string& token);
    /// Inverse of parse.
    [[nodiscard]] std::string token() const;

    friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

/// The swept dimensions, named as in config files.
enum class Axis { lambda, degree, grid, method };

struct ExperimentConfig {
    std::string name = "experiment";
    Problem problem = Problem::bratu1d;
    std::vector<double> lambdas{0.0};
    std::vector<int> degrees;
    std::vector<std::size_t> grids; ///< elements per direction
    std::vector<MethodSpec> methods;
    /// Nesting order of the Cartesian product, outermost first. Follows the
    /// order in which the lists appear in the file.
    std::vector<Axis> order{Axis::lambda, Axis::degree, Axis::grid, Axis::method};

    double tol = 1e-12;
    std::size_t maxiter = 1000;
    bool mass_norm = false;
    int wave_number = 1; ///< k in sin(2 k pi x) of the 1D Bratu source
    bool lifted_initial_guess = false;

    nonlinear::InnerConfig inner;
    /// Inner linear tolerance overrides keyed by (degree, grid); degree 0
    /// matches any degree.
    std::map<std::pair<int, std::size_t>, double> inner_tol_overrides;

    std::string csv_name;    ///< empty: "<name>.csv"
    std::string history_dir; ///< empty: no per-cell history files
    unsigned long seed = 0;  ///< reserved; every solver here is deterministic

    [[nodiscard]] double inner_tol_for(int degree, std::size_t grid) const;
    [[nodiscard]] std::size_t cell_count() const;
};

/// Reads the key = value format; throws std::runtime_error with a line number.
[[nodiscard]] ExperimentConfig parse_config(std::istream& in);
[[nodiscard]] ExperimentConfig parse_config_file(const std::filesystem::path& path);

struct Cell {
    double lambda = 0.0;
    int degree = 1;
    std::size_t grid = 1;
    MethodSpec method;
};

/// Cells of the sweep in declaration order.
[[nodiscard]] std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg);

/// Picks one cell either by position ("3") or by fields
/// ("lambda=7,p=5,n=8,method=rre(5)"); unspecified fields match anything and
/// the first match wins. Throws std::invalid_argument when nothing matches.
[[nodiscard]] Cell select_cell(const ExperimentConfig& cfg, const std::string& selector);

struct ResultRow {
    std::string problem;
    std::string method;
    double lambda = 0.0;
    int p = 0;
    double h = 0.0;
    std::size_t iter = 0;
    double relative_residual = 0.0;
    double l2_err = 0.0;
    double cpu_s = 0.0;
    double rhs_time_s = 0.0;
    double mg_time_s = 0.0;
    double extrapol_time_s = 0.0;
    bool converged = false;
    std::string note; ///< failure reason; not part of the CSV
};

struct CellOutcome {
    ResultRow row;
    nonlinear::IterationHistory history;
};

[[nodiscard]] nonlinear::OuterConfig outer_config_for(const ExperimentConfig& cfg, const Cell& cell);

/// Prefix of ResultRow::note when a cell stopped on an exception rather than
/// finishing its iteration.
inline constexpr const char* kCellErrorPrefix = "error: ";

/// Runs one cell. Solver exceptions end up in row.note with converged = false.
[[nodiscard]] CellOutcome run_cell(const ExperimentConfig& cfg, const Cell& cell);

/// Runs every cell; rows come back in declaration order whatever the thread
/// count. When `histories` is given it receives one history per row.
[[nodiscard]] std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, unsigned threads = 1,
                                                    std::vector<nonlinear::IterationHistory>* histories = nullptr);

inline constexpr const char* kCsvHeader =
    "problem,method,lambda,p,h,iter,relative_residual,l2_err,cpu_s,rhs_time_s,mg_time_s,extrapol_time_s,converged";

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
/// Throws std::runtime_error naming the path on IO failure.
void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
[[nodiscard]] std::vector<ResultRow> read_csv(std::istream& in);
[[nodiscard]] std::vector<ResultRow> read_csv_file(const std::filesystem::path& path);

void write_history(const nonlinear::IterationHistory& history, std::ostream& out);
void emit_history(const nonlinear::IterationHistory& history, const std::filesystem::path& path);

/// Fixed-width table; unconverged iteration counts carry the "^a" marker and
/// a footnote explains it.
[[nodiscard]] std::string render_report(const std::vector<ResultRow>& rows);

/// Describes the first difference outside the timing columns, or nullopt when
/// the two row lists agree there exactly.
[[nodiscard]] std::optional<std::string> compare_untimed(const std::vector<ResultRow>& a,
                                                         const std::vector<ResultRow>& b);

/// Formats a real as in the CSV: scientific, 6 significant digits.
[[nodiscard]] std::string format_real(double v);

} // namespace vexmg::bench
