#include "vexmg/bench.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace vexmg::bench;

namespace {

#ifndef VEXMG_CONFIG_DIR
#define VEXMG_CONFIG_DIR "configs"
#endif

int run_config(const fs::path& config, const fs::path& out_dir, unsigned threads) {
    const ExperimentConfig cfg = parse_config_file(config);
    std::vector<vexmg::nonlinear::IterationHistory> histories;
    const auto rows = run_experiment(cfg, threads, cfg.history_dir.empty() ? nullptr : &histories);

    const fs::path csv = out_dir / (cfg.csv_name.empty() ? cfg.name + ".csv" : cfg.csv_name);
    emit_csv(rows, csv);
    if (!cfg.history_dir.empty()) {
        const auto cells = enumerate_cells(cfg);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto& c = cells[i];
            const std::string file = "cell" + std::to_string(i) + "_lambda" + format_real(c.lambda) + "_p" +
                                     std::to_string(c.degree) + "_n" + std::to_string(c.grid) + "_" +
                                     c.method.token() + ".csv";
            emit_history(histories[i], out_dir / cfg.history_dir / file);
        }
    }
    std::cout << cfg.name << " (" << rows.size() << " cells)\n" << render_report(rows) << "wrote " << csv.string()
              << '\n';
    bool all_ran = true;
    for (const auto& r : rows) all_ran = all_ran && !r.note.starts_with(kCellErrorPrefix);
    return all_ran ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"IGA multigrid solver with Picard extrapolation: benchmark harness"};
    app.require_subcommand(1);

    fs::path config;
    fs::path out_dir = ".";
    unsigned threads = 1;
    auto* run = app.add_subcommand("run", "run every cell of a config file and write its CSV");
    run->add_option("--config", config, "experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--parallel", threads, "worker threads (cells run independently)")->check(CLI::PositiveNumber);

    int table = 0;
    fs::path config_dir = VEXMG_CONFIG_DIR;
    auto* tab = app.add_subcommand("table", "run a checked-in table config");
    tab->add_option("number", table, "table number")->required()->check(CLI::Range(1, 5));
    tab->add_option("--out", out_dir, "output directory");
    tab->add_option("--parallel", threads, "worker threads")->check(CLI::PositiveNumber);
    tab->add_option("--configs", config_dir, "directory holding table1.cfg .. table5.cfg");

    std::string selector;
    fs::path history_out;
    auto* hist = app.add_subcommand("history", "convergence history of one cell as CSV");
    hist->add_option("--config", config, "experiment config")->required()->check(CLI::ExistingFile);
    hist->add_option("--cell", selector, "cell index or lambda=..,p=..,n=..,method=..")->required();
    hist->add_option("--out", history_out, "output file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_config(config, out_dir, threads);
        if (*tab) return run_config(config_dir / ("table" + std::to_string(table) + ".cfg"), out_dir, threads);
        if (*hist) {
            const ExperimentConfig cfg = parse_config_file(config);
            const Cell cell = select_cell(cfg, selector);
            const CellOutcome outcome = run_cell(cfg, cell);
            if (history_out.empty())
                write_history(outcome.history, std::cout);
            else
                emit_history(outcome.history, history_out);
            std::cerr << outcome.row.method << " lambda=" << outcome.row.lambda << " p=" << outcome.row.p
                      << " n=" << cell.grid << ": iter=" << outcome.row.iter
                      << (outcome.row.converged ? "" : " (not converged)") << '\n';
            return outcome.row.note.starts_with(kCellErrorPrefix) ? 1 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
