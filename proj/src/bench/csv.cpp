#include "vexmg/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vexmg::bench {

namespace {

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Splits one RFC-4180 record. Quoted fields may hold commas, doubled
/// quotes and line breaks, so records can span several physical lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool quoted = false;
    bool any = false;
    char c = 0;
    while (in.get(c)) {
        any = true;
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field += '"';
                    in.get();
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    return true;
}

double parse_real(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    return std::stod(s);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace

std::string format_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
    out << kCsvHeader << "\r\n";
    for (const auto& r : rows) {
        out << quote_field(r.problem) << ',' << quote_field(r.method) << ',' << format_real(r.lambda) << ',' << r.p
            << ',' << format_real(r.h) << ',' << r.iter << ',' << format_real(r.relative_residual) << ','
            << format_real(r.l2_err) << ',' << format_real(r.cpu_s) << ',' << format_real(r.rhs_time_s) << ','
            << format_real(r.mg_time_s) << ',' << format_real(r.extrapol_time_s) << ','
            << (r.converged ? "true" : "false") << "\r\n";
    }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_csv(rows, out);
    finish(out, path);
}

std::vector<ResultRow> read_csv(std::istream& in) {
    std::vector<std::string> f;
    if (!read_record(in, f)) throw std::runtime_error("empty CSV");
    std::string header;
    for (std::size_t i = 0; i < f.size(); ++i) header += (i ? "," : "") + f[i];
    if (header != kCsvHeader) throw std::runtime_error("unexpected CSV header: " + header);
    std::vector<ResultRow> rows;
    std::size_t line = 1;
    while (read_record(in, f)) {
        ++line;
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 13) throw std::runtime_error("CSV record " + std::to_string(line) + " has " +
                                                     std::to_string(f.size()) + " fields");
        ResultRow r;
        r.problem = f[0];
        r.method = f[1];
        r.lambda = parse_real(f[2]);
        r.p = std::stoi(f[3]);
        r.h = parse_real(f[4]);
        r.iter = std::stoul(f[5]);
        r.relative_residual = parse_real(f[6]);
        r.l2_err = parse_real(f[7]);
        r.cpu_s = parse_real(f[8]);
        r.rhs_time_s = parse_real(f[9]);
        r.mg_time_s = parse_real(f[10]);
        r.extrapol_time_s = parse_real(f[11]);
        if (f[12] != "true" && f[12] != "false") throw std::runtime_error("bad converged flag '" + f[12] + "'");
        r.converged = f[12] == "true";
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return read_csv(in);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_history(const nonlinear::IterationHistory& history, std::ostream& out) {
    out << "iter,relative_residual,l2_err\r\n";
    for (const auto& r : history.records)
        out << r.iter << ',' << format_real(r.relative_residual) << ',' << format_real(r.l2_error) << "\r\n";
}

void emit_history(const nonlinear::IterationHistory& history, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    write_history(history, out);
    finish(out, path);
}

std::string render_report(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(13) << "problem" << std::setw(12) << "method" << std::right << std::setw(8)
       << "lambda" << std::setw(3) << "p" << std::setw(10) << "h" << std::setw(8) << "iter" << std::setw(13)
       << "residual" << std::setw(13) << "L2-err" << std::setw(10) << "CPU(s)" << std::setw(10) << "RHS(s)"
       << std::setw(10) << "MG(s)" << std::setw(12) << "Extrap(s)" << '\n';
    bool any_unconverged = false;
    for (const auto& r : rows) {
        const std::string iter = std::to_string(r.iter) + (r.converged ? "" : "^a");
        any_unconverged = any_unconverged || !r.converged;
        char h[16];
        std::snprintf(h, sizeof h, "1/%.0f", 1.0 / r.h);
        char lam[16];
        std::snprintf(lam, sizeof lam, "%g", r.lambda);
        char num[6][24];
        const double vals[6] = {r.relative_residual, r.l2_err, r.cpu_s, r.rhs_time_s, r.mg_time_s, r.extrapol_time_s};
        for (int k = 0; k < 6; ++k) std::snprintf(num[k], sizeof num[k], k < 2 ? "%.2e" : "%.3g", vals[k]);
        os << std::left << std::setw(13) << r.problem << std::setw(12) << r.method << std::right << std::setw(8)
           << lam << std::setw(3) << r.p << std::setw(10) << h << std::setw(8) << iter << std::setw(13) << num[0]
           << std::setw(13) << num[1] << std::setw(10) << num[2] << std::setw(10) << num[3] << std::setw(10)
           << num[4] << std::setw(12) << num[5];
        if (!r.note.empty()) os << "  [" << r.note << ']';
        os << '\n';
    }
    if (any_unconverged) os << "^a nonlinear tolerance not attained\n";
    return os.str();
}

std::optional<std::string> compare_untimed(const std::vector<ResultRow>& a, const std::vector<ResultRow>& b) {
    if (a.size() != b.size())
        return "row count " + std::to_string(a.size()) + " vs " + std::to_string(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a[i];
        const auto& y = b[i];
        auto diff = [&](const char* col, const std::string& u, const std::string& v) -> std::optional<std::string> {
            if (u == v) return std::nullopt;
            return "row " + std::to_string(i + 1) + " column " + col + ": " + u + " vs " + v;
        };
        for (auto d : {diff("problem", x.problem, y.problem), diff("method", x.method, y.method),
                       diff("lambda", format_real(x.lambda), format_real(y.lambda)),
                       diff("p", std::to_string(x.p), std::to_string(y.p)),
                       diff("h", format_real(x.h), format_real(y.h)),
                       diff("iter", std::to_string(x.iter), std::to_string(y.iter)),
                       diff("relative_residual", format_real(x.relative_residual), format_real(y.relative_residual)),
                       diff("l2_err", format_real(x.l2_err), format_real(y.l2_err)),
                       diff("converged", x.converged ? "true" : "false", y.converged ? "true" : "false")})
            if (d) return d;
    }
    return std::nullopt;
}

} // namespace vexmg::bench
