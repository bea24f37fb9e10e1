#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hnequiv/report.hpp"

using namespace hnequiv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hnequiv_report_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double reference_quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto i = static_cast<std::size_t>(std::floor(h));
    if (i + 1 >= v.size()) return v.back();
    return v[i] + (h - std::floor(h)) * (v[i + 1] - v[i]);
}

const ExperimentResult& table5_result() {
    static const ExperimentResult r = [] {
        auto c = SimulationConfig::study_defaults(Experiment::Table5);
        c.replications = 50;
        return run_experiment(c);
    }();
    return r;
}

ExperimentResult with_failures() {
    auto c = SimulationConfig::study_defaults(Experiment::Table1);
    c.replications = 6;
    c.m_values = {5, 400};
    c.epsilon_values = {0.01};
    c.max_draws = 30'000;
    return run_experiment(c);
}

} // namespace

TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 4.015727, 1e-300, 123456789.125, -2.5e-7, 5.0}) {
        const auto s = format_double(v);
        CHECK(parse_double(s).value() == v);
    }
    CHECK(format_double(100.0) == "100");
    CHECK_FALSE(parse_double("12abc").has_value());
    CHECK_FALSE(parse_double("").has_value());
}

TEST_CASE("table 5 CSV layout") {
    const auto bundle = make_bundle(table5_result());
    REQUIRE(bundle.tables.size() == 1);
    const auto text = to_csv_string(bundle.tables[0]);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "n,estimator,mean,mse");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(rows == 9);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.back() == '\n');
}

TEST_CASE("empty bundle gives a header-only file") {
    ReportBundle empty;
    empty.tables.push_back(make_table(Experiment::Table5, {}));
    const auto dir = scratch("empty");
    const auto paths = write_csv(empty, dir);
    REQUIRE(paths.size() == 1);
    CHECK(slurp(paths[0]) == "n,estimator,mean,mse\n");
    const auto t = read_csv(paths[0]);
    CHECK(t.rows.empty());
    CHECK(t.columns.size() == 4);
}

TEST_CASE("every layout names its columns") {
    CHECK(make_table(Experiment::Table1, {}).columns == std::vector<std::string>{"epsilon", "m", "mean", "mse"});
    CHECK(make_table(Experiment::Table2, {}).columns == std::vector<std::string>{"epsilon", "m", "mean", "mse", "variance"});
    CHECK(make_table(Experiment::Table3, {}).columns == std::vector<std::string>{"epsilon", "n", "mean", "mse"});
    CHECK(make_table(Experiment::Table4, {}).columns == std::vector<std::string>{"estimator", "epsilon", "n", "mean", "mse"});
    CHECK(make_table(Experiment::Custom, {}).columns == std::vector<std::string>{"estimator", "n", "epsilon", "mean", "mse"});
}

TEST_CASE("CSV round trip is exact") {
    const auto bundle = make_bundle(table5_result());
    const auto dir = scratch("csv");
    const auto paths = write_csv(bundle, dir);
    const auto back = read_csv(paths[0]);
    CHECK(back.name == "table5");
    CHECK(back.columns == bundle.tables[0].columns);
    REQUIRE(back.rows.size() == bundle.tables[0].rows.size());
    for (std::size_t i = 0; i < back.rows.size(); ++i) CHECK(back.rows[i] == bundle.tables[0].rows[i]);
}

TEST_CASE("CSV quoting") {
    CsvTable t{"q", {"a,b", "c"}, {{std::string("x\"y"), 1.5}}};
    const auto text = to_csv_string(t);
    CHECK(text == "\"a,b\",c\n\"x\"\"y\",1.5\n");
    const auto dir = scratch("quote");
    const auto p = write_csv(ReportBundle{{}, {t}, {}}, dir);
    const auto back = read_csv(p[0]);
    CHECK(back.columns == t.columns);
    CHECK(back.rows == t.rows);
}

TEST_CASE("JSON round trip is exact") {
    const auto bundle = make_bundle(with_failures());
    const auto dir = scratch("json");
    write_json(bundle, dir / "table1.json");
    const auto back = read_json(dir / "table1.json");
    CHECK(back.metadata.seed == bundle.metadata.seed);
    CHECK(back.metadata.experiment == "table1");
    CHECK(back.metadata.notes == bundle.metadata.notes);
    CHECK(back.tables[0].rows == bundle.tables[0].rows);
    REQUIRE(back.cells.size() == bundle.cells.size());
    for (std::size_t i = 0; i < back.cells.size(); ++i) {
        const auto& a = bundle.cells[i];
        const auto& b = back.cells[i];
        CHECK(a.cell == b.cell);
        CHECK(a.replicate_values == b.replicate_values);
        CHECK(a.mse == b.mse);
        CHECK(a.truth == b.truth);
        CHECK(a.failures.size() == b.failures.size());
        if (!a.replicate_values.empty()) {
            CHECK(a.mean == b.mean);
            CHECK(a.variance == b.variance);
            CHECK(a.boxplot.q1 == b.boxplot.q1);
        }
    }
    // rewriting the loaded bundle reproduces the bytes
    write_json(back, dir / "again.json");
    CHECK(slurp(dir / "again.json") == slurp(dir / "table1.json"));
}

TEST_CASE("JSON content") {
    const auto result = with_failures();
    const auto j = to_json(make_bundle(result));
    CHECK(j.at("schema_version") == kReportSchemaVersion);
    CHECK(j.at("metadata").at("timestamp").is_null());
    CHECK_FALSE(j.at("metadata").at("config").contains("jobs"));
    std::size_t excluded = 0;
    for (const auto& c : j.at("cells")) {
        CHECK(c.at("replicate_values").size() == c.at("replications").get<std::size_t>() - c.at("excluded").get<std::size_t>());
        CHECK(c.at("failures").size() == c.at("excluded").get<std::size_t>());
        excluded += c.at("excluded").get<std::size_t>();
    }
    CHECK(excluded > 0);
}

TEST_CASE("stored summaries are recomputable from the replicates") {
    const auto dir = scratch("recompute");
    write_json(make_bundle(table5_result()), dir / "t5.json");
    const auto back = read_json(dir / "t5.json");
    for (const auto& c : back.cells) {
        const auto& v = c.replicate_values;
        CHECK(c.boxplot.min == *std::min_element(v.begin(), v.end()));
        CHECK(c.boxplot.max == *std::max_element(v.begin(), v.end()));
        CHECK(std::abs(c.boxplot.q1 - reference_quantile(v, 0.25)) < 1e-12);
        CHECK(std::abs(c.boxplot.median - reference_quantile(v, 0.5)) < 1e-12);
        CHECK(std::abs(c.boxplot.q3 - reference_quantile(v, 0.75)) < 1e-12);
        const auto again = aggregate(c.cell, c.truth, c.replications, v, c.failures);
        CHECK(std::abs(again.mean - c.mean) < 1e-12);
        CHECK(std::abs(*again.mse - *c.mse) < 1e-12);
        CHECK(std::abs(again.boxplot.mean - c.boxplot.mean) < 1e-12);
    }
}

TEST_CASE("timestamp only from SOURCE_DATE_EPOCH") {
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    const auto b = make_bundle(table5_result());
    ::unsetenv("SOURCE_DATE_EPOCH");
    CHECK(b.metadata.timestamp == std::optional<std::string>("1700000000"));
    CHECK_FALSE(make_bundle(table5_result()).metadata.timestamp.has_value());
}

TEST_CASE("I/O errors carry the path") {
    const auto bundle = make_bundle(table5_result());
    const auto blocker = scratch("io") / "file";
    std::ofstream(blocker) << "x";
    try {
        write_json(bundle, blocker / "sub" / "out.json");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("out.json") != std::string::npos);
    }
    CHECK_THROWS_AS(read_csv("/nonexistent/hnequiv.csv"), IoError);
    CHECK_THROWS_AS(read_json(blocker), IoError);
}
