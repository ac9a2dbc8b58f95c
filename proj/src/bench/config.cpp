#include "vexmg/bench.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

namespace vexmg::bench {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    // Commas inside parentheses stay with their item.
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    std::erase_if(out, [](const std::string& x) { return x.empty(); });
    return out;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

template <typename Int>
Int to_int(const std::string& s) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

Problem to_problem(const std::string& s) {
    if (s == "bratu1d") return Problem::bratu1d;
    if (s == "bratu2d") return Problem::bratu2d;
    if (s == "monge_ampere") return Problem::monge_ampere;
    throw std::invalid_argument("unknown problem '" + s + "'");
}

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

void note_axis(std::vector<Axis>& seen, Axis a) {
    if (std::find(seen.begin(), seen.end(), a) == seen.end()) seen.push_back(a);
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.lambdas.empty()) throw std::invalid_argument("lambda list is empty");
    if (cfg.degrees.empty()) throw std::invalid_argument("degree list is empty");
    if (cfg.grids.empty()) throw std::invalid_argument("grid list is empty");
    if (cfg.methods.empty()) throw std::invalid_argument("method list is empty");
    for (int p : cfg.degrees)
        if (p < 1) throw std::invalid_argument("degrees must be >= 1");
    const std::size_t coarsest = *std::min_element(cfg.grids.begin(), cfg.grids.end());
    for (std::size_t n : cfg.grids)
        if (n % coarsest != 0 || !is_power_of_two(n / coarsest))
            throw std::invalid_argument("grid " + std::to_string(n) + " is not a power of two times " +
                                        std::to_string(coarsest));
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

} // namespace

std::string to_string(Problem p) {
    switch (p) {
    case Problem::bratu1d: return "bratu1d";
    case Problem::bratu2d: return "bratu2d";
    case Problem::monge_ampere: return "monge_ampere";
    }
    return "?";
}

MethodSpec MethodSpec::parse(const std::string& raw) {
    const std::string token = trim(raw);
    if (token == "picard") return {Kind::picard, 0};
    if (token == "picard_slu") return {Kind::picard_slu, 0};
    const auto open = token.find('(');
    if (open == std::string::npos || token.back() != ')')
        throw std::invalid_argument("unknown method '" + token + "'");
    const std::string head = token.substr(0, open);
    const auto depth = to_int<std::size_t>(trim(token.substr(open + 1, token.size() - open - 2)));
    if (head == "mpe") return {Kind::mpe, depth};
    if (head == "rre") return {Kind::rre, depth};
    if (head == "aa") {
        if (depth == 0) throw std::invalid_argument("aa needs depth >= 1");
        return {Kind::aa, depth};
    }
    throw std::invalid_argument("unknown method '" + token + "'");
}

std::string MethodSpec::token() const {
    switch (kind) {
    case Kind::picard: return "picard";
    case Kind::picard_slu: return "picard_slu";
    case Kind::mpe: return "mpe(" + std::to_string(depth) + ")";
    case Kind::rre: return "rre(" + std::to_string(depth) + ")";
    case Kind::aa: return "aa(" + std::to_string(depth) + ")";
    }
    return "?";
}

double ExperimentConfig::inner_tol_for(int degree, std::size_t grid) const {
    if (auto it = inner_tol_overrides.find({degree, grid}); it != inner_tol_overrides.end()) return it->second;
    if (auto it = inner_tol_overrides.find({0, grid}); it != inner_tol_overrides.end()) return it->second;
    return inner.linear_tol;
}

std::size_t ExperimentConfig::cell_count() const {
    return lambdas.size() * degrees.size() * grids.size() * methods.size();
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::vector<Axis> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        try {
            if (eq == std::string::npos) throw std::invalid_argument("expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "name") {
                cfg.name = value;
            } else if (key == "problem") {
                cfg.problem = to_problem(value);
            } else if (key == "lambda") {
                cfg.lambdas.clear();
                for (const auto& v : split_list(value)) cfg.lambdas.push_back(to_double(v));
                note_axis(seen, Axis::lambda);
            } else if (key == "degree") {
                cfg.degrees.clear();
                for (const auto& v : split_list(value)) cfg.degrees.push_back(to_int<int>(v));
                note_axis(seen, Axis::degree);
            } else if (key == "grid") {
                cfg.grids.clear();
                for (const auto& v : split_list(value)) cfg.grids.push_back(to_int<std::size_t>(v));
                note_axis(seen, Axis::grid);
            } else if (key == "method") {
                cfg.methods.clear();
                for (const auto& v : split_list(value)) cfg.methods.push_back(MethodSpec::parse(v));
                note_axis(seen, Axis::method);
            } else if (key == "tol") {
                cfg.tol = to_double(value);
            } else if (key == "maxiter") {
                cfg.maxiter = to_int<std::size_t>(value);
            } else if (key == "norm") {
                if (value != "euclidean" && value != "mass") throw std::invalid_argument("norm is euclidean or mass");
                cfg.mass_norm = value == "mass";
            } else if (key == "wave_number") {
                cfg.wave_number = to_int<int>(value);
            } else if (key == "initial_guess") {
                if (value != "zero" && value != "lifted") throw std::invalid_argument("initial_guess is zero or lifted");
                cfg.lifted_initial_guess = value == "lifted";
            } else if (key == "inner.solve") {
                if (value == "one_vcycle") cfg.inner.kind = nonlinear::InnerSolve::one_vcycle;
                else if (value == "vcycle_to_tol") cfg.inner.kind = nonlinear::InnerSolve::vcycle_to_tol;
                else throw std::invalid_argument("inner.solve is one_vcycle or vcycle_to_tol");
            } else if (key == "inner.start") {
                if (value == "warm") cfg.inner.start = nonlinear::InnerStart::warm;
                else if (value == "cold") cfg.inner.start = nonlinear::InnerStart::cold;
                else throw std::invalid_argument("inner.start is warm or cold");
            } else if (key == "inner.tol_reference") {
                if (value == "rhs") cfg.inner.tol_reference = nonlinear::InnerTolReference::rhs;
                else if (value == "initial_residual") cfg.inner.tol_reference = nonlinear::InnerTolReference::initial_residual;
                else throw std::invalid_argument("inner.tol_reference is rhs or initial_residual");
            } else if (key == "inner.tol") {
                cfg.inner.linear_tol = to_double(value);
            } else if (key.starts_with("inner.tol.")) {
                // inner.tol.p2 = 8:1e-2, 16:1e-3   or   inner.tol.any = ...
                const std::string which = key.substr(10);
                int degree = 0;
                if (which != "any") {
                    if (which.size() < 2 || which[0] != 'p') throw std::invalid_argument("expected inner.tol.p<d>");
                    degree = to_int<int>(which.substr(1));
                }
                for (const auto& item : split_list(value)) {
                    const auto colon = item.find(':');
                    if (colon == std::string::npos) throw std::invalid_argument("expected grid:tol, got '" + item + "'");
                    cfg.inner_tol_overrides[{degree, to_int<std::size_t>(trim(item.substr(0, colon)))}] =
                        to_double(trim(item.substr(colon + 1)));
                }
            } else if (key == "inner.max_cycles") {
                cfg.inner.max_cycles = to_int<std::size_t>(value);
            } else if (key == "inner.min_cycles") {
                cfg.inner.min_cycles = to_int<std::size_t>(value);
            } else if (key == "inner.omega") {
                cfg.inner.smoother.omega = to_double(value);
            } else if (key == "inner.nu1") {
                cfg.inner.smoother.nu1 = to_int<int>(value);
            } else if (key == "inner.nu2") {
                cfg.inner.smoother.nu2 = to_int<int>(value);
            } else if (key == "inner.coarsening") {
                if (value == "galerkin") cfg.inner.coarsening = multigrid::Coarsening::galerkin;
                else if (value == "rediscretize") cfg.inner.coarsening = multigrid::Coarsening::rediscretize;
                else throw std::invalid_argument("inner.coarsening is galerkin or rediscretize");
            } else if (key == "inner.direct_threshold") {
                cfg.inner.direct_threshold = to_int<std::size_t>(value);
            } else if (key == "output") {
                cfg.csv_name = value;
            } else if (key == "history_dir") {
                cfg.history_dir = value;
            } else if (key == "seed") {
                cfg.seed = to_int<unsigned long>(value);
            } else {
                throw std::invalid_argument("unknown key '" + key + "'");
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    for (Axis a : {Axis::lambda, Axis::degree, Axis::grid, Axis::method})
        if (std::find(seen.begin(), seen.end(), a) == seen.end()) seen.push_back(a);
    cfg.order = seen;
    try {
        validate(cfg);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    try {
        return parse_config(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::vector<Cell> enumerate_cells(const ExperimentConfig& cfg) {
    std::vector<Cell> cells;
    cells.reserve(cfg.cell_count());
    std::array<std::size_t, 4> idx{};
    auto size_of = [&](Axis a) -> std::size_t {
        switch (a) {
        case Axis::lambda: return cfg.lambdas.size();
        case Axis::degree: return cfg.degrees.size();
        case Axis::grid: return cfg.grids.size();
        case Axis::method: return cfg.methods.size();
        }
        return 0;
    };
    const std::size_t total = cfg.cell_count();
    for (std::size_t flat = 0; flat < total; ++flat) {
        // Mixed-radix decode with the last axis varying fastest.
        std::size_t rest = flat;
        for (std::size_t k = cfg.order.size(); k-- > 0;) {
            const std::size_t n = size_of(cfg.order[k]);
            idx[static_cast<std::size_t>(cfg.order[k])] = rest % n;
            rest /= n;
        }
        cells.push_back(Cell{cfg.lambdas[idx[0]], cfg.degrees[idx[1]], cfg.grids[idx[2]], cfg.methods[idx[3]]});
    }
    return cells;
}

Cell select_cell(const ExperimentConfig& cfg, const std::string& selector) {
    const auto cells = enumerate_cells(cfg);
    const std::string sel = trim(selector);
    if (!sel.empty() && std::all_of(sel.begin(), sel.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        const auto i = to_int<std::size_t>(sel);
        if (i >= cells.size()) throw std::invalid_argument("cell index " + sel + " out of range");
        return cells[i];
    }
    std::optional<double> lambda;
    std::optional<int> degree;
    std::optional<std::size_t> grid;
    std::optional<MethodSpec> method;
    for (const auto& item : split_list(sel)) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("selector item '" + item + "' lacks '='");
        const std::string k = trim(item.substr(0, eq));
        const std::string v = trim(item.substr(eq + 1));
        if (k == "lambda") lambda = to_double(v);
        else if (k == "p" || k == "degree") degree = to_int<int>(v);
        else if (k == "n" || k == "grid") grid = to_int<std::size_t>(v);
        else if (k == "method") method = MethodSpec::parse(v);
        else throw std::invalid_argument("unknown selector field '" + k + "'");
    }
    for (const auto& c : cells) {
        if (lambda && c.lambda != *lambda) continue;
        if (degree && c.degree != *degree) continue;
        if (grid && c.grid != *grid) continue;
        if (method && !(c.method == *method)) continue;
        return c;
    }
    throw std::invalid_argument("no cell matches '" + selector + "'");
}

} // namespace vexmg::bench
