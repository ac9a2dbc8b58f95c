#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vexmg/bench.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vexmg;
using namespace vexmg::bench;

namespace {

const std::filesystem::path kSource = VEXMG_SOURCE_DIR;

ExperimentConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string parse_error(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

ResultRow sample_row() {
    ResultRow r;
    r.problem = "bratu1d";
    r.method = "rre(5)";
    r.lambda = 7.0;
    r.p = 5;
    r.h = 0.125;
    r.iter = 25;
    r.relative_residual = 5.3148e-16;
    r.l2_err = 5.68885e-6;
    r.cpu_s = 0.0123;
    r.converged = true;
    return r;
}

std::filesystem::path scratch_dir(const std::string& leaf) {
    auto dir = std::filesystem::temp_directory_path() / ("vexmg_test_bench_" + leaf);
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse(R"(# comment
name = demo
problem = bratu2d
method = picard, mpe(3), aa(5)
lambda = 3, 6.966
degree = 2
grid = 16, 32
tol = 1e-8
inner.solve = vcycle_to_tol
inner.tol.any = 16:1e-3, 32:1e-4
inner.tol.p2 = 32:1e-5
)");
    CHECK(cfg.name == "demo");
    CHECK(cfg.problem == Problem::bratu2d);
    CHECK(cfg.lambdas == std::vector<double>{3.0, 6.966});
    CHECK(cfg.methods.size() == 3);
    CHECK(cfg.methods[1] == MethodSpec{MethodSpec::Kind::mpe, 3});
    CHECK(cfg.tol == 1e-8);
    CHECK(cfg.inner.kind == nonlinear::InnerSolve::vcycle_to_tol);
    CHECK(cfg.inner_tol_for(2, 16) == 1e-3);
    CHECK(cfg.inner_tol_for(2, 32) == 1e-5);
    CHECK(cfg.inner_tol_for(3, 32) == 1e-4);
    CHECK(cfg.cell_count() == 12);
    // Method was declared first, so it varies slowest.
    REQUIRE(cfg.order.size() == 4);
    CHECK(cfg.order.front() == Axis::method);
}

TEST_CASE("config errors carry the line number") {
    CHECK(parse_error("problem = bratu1d\nfoo = 1\n").find("line 2") != std::string::npos);
    CHECK(parse_error("problem = heat\n").find("unknown problem") != std::string::npos);
    CHECK(parse_error("degree = 1\ngrid = 8, 24\nmethod = picard\n").find("power of two") != std::string::npos);
    CHECK(parse_error("degree = 1\ngrid = 8\nmethod = mpe(x)\n").find("line 3") != std::string::npos);
    CHECK_FALSE(parse_error("degree = 1\ngrid = 8\n").empty()); // no methods
    CHECK_THROWS((void)parse_config_file(kSource / "configs" / "missing.cfg"));
}

TEST_CASE("method tokens round-trip") {
    for (const char* t : {"picard", "picard_slu", "mpe(5)", "rre(8)", "aa(3)"})
        CHECK(MethodSpec::parse(t).token() == t);
    CHECK_THROWS((void)MethodSpec::parse("aa(0)"));
    CHECK_THROWS((void)MethodSpec::parse("gmres(5)"));
}

TEST_CASE("shipped configs parse and have the expected sizes") {
    const std::pair<const char*, std::size_t> expected[] = {
        {"table1.cfg", 35}, {"table2.cfg", 96}, {"table3.cfg", 21}, {"table4.cfg", 80}, {"table5.cfg", 45}};
    for (const auto& [file, cells] : expected) {
        CAPTURE(file);
        const auto cfg = parse_config_file(kSource / "configs" / file);
        CHECK(cfg.cell_count() == cells);
        CHECK(enumerate_cells(cfg).size() == cells);
    }
}

TEST_CASE("cells follow declaration order and selectors find them") {
    const auto cfg = parse("lambda = 1, 7\ndegree = 2\ngrid = 8, 16\nmethod = picard, rre(5)\n");
    const auto cells = enumerate_cells(cfg);
    REQUIRE(cells.size() == 8);
    CHECK(cells[0].lambda == 1.0);
    CHECK(cells[1].method.token() == "rre(5)");
    CHECK(cells[2].grid == 16);
    CHECK(cells[4].lambda == 7.0);
    const auto c = select_cell(cfg, "lambda=7,n=16,method=rre(5)");
    CHECK(c.lambda == 7.0);
    CHECK(c.grid == 16);
    CHECK(c.method.token() == "rre(5)");
    CHECK(select_cell(cfg, "3").grid == 16);
    CHECK_THROWS_AS((void)select_cell(cfg, "lambda=2"), std::invalid_argument);
    CHECK_THROWS_AS((void)select_cell(cfg, "8"), std::invalid_argument);
}

TEST_CASE("CSV output") {
    SUBCASE("empty row list gives a header-only file") {
        std::ostringstream os;
        write_csv({}, os);
        CHECK(os.str() == std::string(kCsvHeader) + "\r\n");
    }
    SUBCASE("one row round-trips through a file") {
        const auto dir = scratch_dir("csv");
        const auto path = dir / "nested" / "one.csv";
        auto row = sample_row();
        row.method = "odd,\"name\"";
        emit_csv({row}, path);
        std::ifstream in(path, std::ios::binary);
        const std::string text((std::istreambuf_iterator<char>(in)), {});
        CHECK(std::count(text.begin(), text.end(), '\n') == 2);
        CHECK(text.find("5.00000e-01") == std::string::npos);
        CHECK(text.find("1.25000e-01") != std::string::npos);
        const auto back = read_csv_file(path);
        REQUIRE(back.size() == 1);
        CHECK(back[0].method == row.method);
        CHECK(back[0].iter == 25);
        CHECK(back[0].converged);
        CHECK_FALSE(compare_untimed({row}, back).has_value());
        std::filesystem::remove_all(dir);
    }
    SUBCASE("reals use six significant digits and NaN is spelled out") {
        CHECK(format_real(1.0 / 3.0) == "3.33333e-01");
        CHECK(format_real(std::nan("")) == "nan");
    }
    SUBCASE("unwritable paths name the path") {
        const auto dir = scratch_dir("ro");
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "file") << "x";
        try {
            emit_csv({}, dir / "file" / "out.csv");
            FAIL("expected an exception");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find("out.csv") != std::string::npos);
        }
        std::filesystem::remove_all(dir);
    }
}

TEST_CASE("compare_untimed ignores timing columns only") {
    auto a = sample_row();
    auto b = a;
    b.cpu_s = 99.0;
    b.mg_time_s = 3.0;
    CHECK_FALSE(compare_untimed({a}, {b}).has_value());
    b.iter = 26;
    const auto d = compare_untimed({a}, {b});
    REQUIRE(d.has_value());
    CHECK(d->find("iter") != std::string::npos);
}

TEST_CASE("report marks exactly the unconverged rows") {
    auto a = sample_row();
    auto b = sample_row();
    b.converged = false;
    b.iter = 1000;
    const auto report = render_report({a, b});
    CHECK(report.find("25^a") == std::string::npos);
    CHECK(report.find("1000^a") != std::string::npos);
    CHECK(report.find("^a nonlinear tolerance not attained") != std::string::npos);
    CHECK(render_report({a}).find("^a") == std::string::npos);
}

TEST_CASE("single cell with maxiter = 0") {
    const auto cfg = parse("problem = bratu1d\nlambda = 7\ndegree = 2\ngrid = 8\nmethod = picard\nmaxiter = 0\n");
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].iter == 0);
    CHECK_FALSE(rows[0].converged);
    CHECK(rows[0].note.empty());
}

TEST_CASE("cell failures are recorded in the row") {
    // Degree 1 cannot represent the Hessian the Monge-Ampere load needs.
    const auto cfg = parse("problem = monge_ampere\ndegree = 1, 2\ngrid = 8\nmethod = picard\nmaxiter = 3\n");
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].converged);
    CHECK(rows[0].note.rfind(kCellErrorPrefix, 0) == 0);
    CHECK(rows[1].note.rfind(kCellErrorPrefix, 0) != 0);
    CHECK(rows[1].iter == 3);
}

TEST_CASE("parallel sweep reproduces the sequential rows") {
    const auto cfg = parse("lambda = 1, 7\ndegree = 2, 3\ngrid = 16\nmethod = picard, mpe(5)\nmaxiter = 40\n");
    CHECK_FALSE(compare_untimed(run_experiment(cfg, 1), run_experiment(cfg, 4)).has_value());
}

TEST_CASE("histories: Picard plateaus while RRE drops below it") {
    const auto cfg = parse_config_file(kSource / "configs" / "table1.cfg");
    auto pic_cell = select_cell(cfg, "n=8,method=picard");
    auto rre_cell = select_cell(cfg, "n=8,method=rre(5)");
    auto pic_cfg = cfg;
    pic_cfg.maxiter = 60;
    const auto pic = run_cell(pic_cfg, pic_cell).history;
    const auto rre = run_cell(cfg, rre_cell);
    REQUIRE(pic.records.size() == 60);
    CHECK(pic.records.back().relative_residual == doctest::Approx(0.39).epsilon(0.15));
    const auto& r = rre.history.records;
    CHECK(r.back().relative_residual <= cfg.tol);
    for (std::size_t i = 9; i < r.size(); ++i) {
        CAPTURE(i);
        CHECK(r[i].relative_residual < pic.records[i].relative_residual);
    }

    std::ostringstream os;
    write_history(rre.history, os);
    const std::string text = os.str();
    CHECK(text.rfind("iter,relative_residual,l2_err\r\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(r.size() + 1));
}

TEST_CASE("Table 1 sweep matches the golden CSV outside the timing columns") {
    const auto cfg = parse_config_file(kSource / "configs" / "table1.cfg");
    const auto rows = run_experiment(cfg);
    const auto golden = read_csv_file(kSource / "tests" / "golden" / "table1.csv");
    REQUIRE(rows.size() == golden.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CAPTURE(i);
        CHECK(rows[i].method == golden[i].method);
        CHECK(rows[i].iter == golden[i].iter);
        CHECK(rows[i].converged == golden[i].converged);
        // Reals are compared loosely so that a different compiler or libm
        // does not break the test.
        CHECK(rows[i].l2_err == doctest::Approx(golden[i].l2_err).epsilon(1e-3));
        if (!rows[i].converged)
            CHECK(rows[i].relative_residual == doctest::Approx(golden[i].relative_residual).epsilon(1e-3));
    }
}
