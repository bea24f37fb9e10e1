#pragma once

// CSV and JSON serialization of experiment results.
//
// CSV: one file per table, LF line endings, numbers at 17 significant digits.
// JSON: schemas/report.schema.json; carries every replicate so the tables and
// box plots can be recomputed from the file alone.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hnequiv/errors.hpp"
#include "hnequiv/simharness.hpp"
#include "hnequiv/version.hpp"

namespace hnequiv {

inline constexpr int kReportSchemaVersion = 1;

using CsvCell = std::variant<std::string, double>;

struct CsvTable {
    std::string name; ///< file stem
    std::vector<std::string> columns;
    std::vector<std::vector<CsvCell>> rows;
};

struct ReportMetadata {
    std::string tool = "hnequiv";
    std::string version = kVersion;
    std::string experiment;
    std::uint64_t seed = 0;
    /// Set only when SOURCE_DATE_EPOCH is exported, so default output is
    /// byte-identical across runs.
    std::optional<std::string> timestamp;
    nlohmann::ordered_json config;
    std::vector<std::string> notes;
    std::optional<double> reference_value;
};

struct ReportBundle {
    ReportMetadata metadata;
    std::vector<CsvTable> tables;
    std::vector<EstimateReport> cells;
};

// ---------------------------------------------------------------------------
// Numbers

inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

inline std::optional<double> parse_double(std::string_view text) {
    double v = 0.0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------------------
// Building

inline nlohmann::ordered_json config_to_json(const SimulationConfig& c) {
    nlohmann::ordered_json j;
    j["experiment"] = std::string(to_string(c.experiment));
    j["seed"] = c.seed.value;
    j["replications"] = c.replications;
    j["n_values"] = c.n_values;
    j["m_values"] = c.m_values;
    j["epsilon_values"] = c.epsilon_values;
    j["xi"] = c.true_params.xi;
    j["eta"] = c.true_params.eta;
    j["max_draws"] = c.max_draws;
    j["correlation"] = c.correlation;
    j["box_upper"] = c.box_upper;
    j["multiplier"] = c.multiplier == MultiplierMode::Shared ? "shared" : "per_vector";
    j["reference_m"] = c.reference_m;
    j["reference_epsilon"] = c.reference_epsilon;
    // jobs is deliberately absent: it must not change the output bytes
    return j;
}

namespace detail {

inline CsvCell num_or_blank(const std::optional<double>& v) {
    if (v) return *v;
    return std::string{};
}

inline std::optional<double> cell_mean(const EstimateReport& r) {
    if (r.replicate_values.empty()) return std::nullopt;
    return r.mean;
}

inline CsvCell opt_int(const std::optional<int>& v) {
    if (v) return static_cast<double>(*v);
    return std::string{};
}

} // namespace detail

/// Table layouts, one per study:
///   table1 epsilon,m,mean,mse          table2 epsilon,m,mean,mse,variance
///   table3 epsilon,n,mean,mse          table4 estimator,epsilon,n,mean,mse
///   table5 n,estimator,mean,mse        custom estimator,n,epsilon,mean,mse
inline CsvTable make_table(Experiment e, const std::vector<EstimateReport>& cells) {
    using detail::num_or_blank, detail::cell_mean, detail::opt_int;
    CsvTable t;
    t.name = std::string(to_string(e));
    for (const auto& c : cells) {
        const auto eps = num_or_blank(c.cell.epsilon);
        const auto mean = num_or_blank(cell_mean(c));
        const auto err = num_or_blank(c.mse);
        switch (e) {
        case Experiment::Table1: t.rows.push_back({eps, opt_int(c.cell.m), mean, err}); break;
        case Experiment::Table2:
            t.rows.push_back({eps, opt_int(c.cell.m), mean, err,
                              num_or_blank(c.replicate_values.empty() ? std::nullopt : std::optional(c.variance))});
            break;
        case Experiment::Table3: t.rows.push_back({eps, opt_int(c.cell.n), mean, err}); break;
        case Experiment::Table4: t.rows.push_back({c.cell.estimator, eps, opt_int(c.cell.n), mean, err}); break;
        case Experiment::Table5: t.rows.push_back({opt_int(c.cell.n), c.cell.estimator, mean, err}); break;
        case Experiment::Custom: t.rows.push_back({c.cell.estimator, opt_int(c.cell.n), eps, mean, err}); break;
        }
    }
    switch (e) {
    case Experiment::Table1: t.columns = {"epsilon", "m", "mean", "mse"}; break;
    case Experiment::Table2: t.columns = {"epsilon", "m", "mean", "mse", "variance"}; break;
    case Experiment::Table3: t.columns = {"epsilon", "n", "mean", "mse"}; break;
    case Experiment::Table4: t.columns = {"estimator", "epsilon", "n", "mean", "mse"}; break;
    case Experiment::Table5: t.columns = {"n", "estimator", "mean", "mse"}; break;
    case Experiment::Custom: t.columns = {"estimator", "n", "epsilon", "mean", "mse"}; break;
    }
    return t;
}

inline ReportBundle make_bundle(const ExperimentResult& result) {
    ReportBundle b;
    const auto& cfg = result.config;
    b.metadata.experiment = std::string(to_string(cfg.experiment));
    b.metadata.seed = cfg.seed.value;
    b.metadata.config = config_to_json(cfg);
    b.metadata.notes = result.notes;
    b.metadata.reference_value = result.reference_value;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) b.metadata.timestamp = epoch;
    b.cells = result.cells;
    b.tables.push_back(make_table(cfg.experiment, result.cells));
    return b;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline std::string to_csv_string(const CsvTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_escape(t.columns[i]);
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            if (const auto* d = std::get_if<double>(&row[i])) out += format_double(*d);
            else out += csv_escape(std::get<std::string>(row[i]));
        }
        out += '\n';
    }
    return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

} // namespace detail

/// Writes `<dir>/<table name>.csv` for every table. Returns the paths written.
inline std::vector<std::filesystem::path> write_csv(const ReportBundle& bundle, const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    for (const auto& t : bundle.tables) {
        const auto path = dir / (t.name + ".csv");
        detail::write_file(path, to_csv_string(t));
        written.push_back(path);
    }
    return written;
}

/// Fields that parse completely as numbers come back as double.
inline CsvTable read_csv(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path);
    CsvTable t;
    t.name = path.stem().string();
    std::istringstream in(text);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            t.columns = detail::split_csv_line(line);
            header = false;
            continue;
        }
        std::vector<CsvCell> row;
        for (auto& f : detail::split_csv_line(line)) {
            if (auto d = parse_double(f)) row.emplace_back(*d);
            else row.emplace_back(std::move(f));
        }
        t.rows.push_back(std::move(row));
    }
    if (header) throw IoError("'" + path.string() + "' has no header row");
    return t;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

template <class T>
nlohmann::ordered_json opt(const std::optional<T>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

template <class T>
std::optional<T> get_opt(const nlohmann::ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

} // namespace detail

inline nlohmann::ordered_json to_json(const EstimateReport& r) {
    using detail::opt;
    nlohmann::ordered_json j;
    j["estimator"] = r.cell.estimator;
    j["n"] = opt(r.cell.n);
    j["m"] = opt(r.cell.m);
    j["epsilon"] = opt(r.cell.epsilon);
    j["truth"] = opt(r.truth);
    j["replications"] = r.replications;
    j["excluded"] = r.failures.size();
    const bool any = !r.replicate_values.empty();
    j["mean"] = any ? nlohmann::ordered_json(r.mean) : nlohmann::ordered_json(nullptr);
    j["mse"] = opt(r.mse);
    j["variance"] = any ? nlohmann::ordered_json(r.variance) : nlohmann::ordered_json(nullptr);
    if (any) {
        j["boxplot"] = {{"min", r.boxplot.min}, {"q1", r.boxplot.q1},         {"median", r.boxplot.median},
                        {"q3", r.boxplot.q3},   {"max", r.boxplot.max},       {"mean", r.boxplot.mean}};
    } else {
        j["boxplot"] = nullptr;
    }
    j["replicate_values"] = r.replicate_values;
    auto failures = nlohmann::ordered_json::array();
    for (const auto& f : r.failures)
        failures.push_back({{"replication", f.replication}, {"reason", f.reason}, {"message", f.message}});
    j["failures"] = failures;
    return j;
}

inline nlohmann::ordered_json to_json(const ReportBundle& b) {
    nlohmann::ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    nlohmann::ordered_json meta;
    meta["tool"] = b.metadata.tool;
    meta["version"] = b.metadata.version;
    meta["experiment"] = b.metadata.experiment;
    meta["seed"] = b.metadata.seed;
    meta["timestamp"] = detail::opt(b.metadata.timestamp);
    meta["quantile_method"] = "linear interpolation between closest ranks, position p (k - 1)";
    meta["reference_value"] = detail::opt(b.metadata.reference_value);
    meta["notes"] = b.metadata.notes;
    meta["config"] = b.metadata.config;
    j["metadata"] = meta;
    auto tables = nlohmann::ordered_json::array();
    for (const auto& t : b.tables) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            auto r = nlohmann::ordered_json::array();
            for (const auto& c : row) {
                if (const auto* d = std::get_if<double>(&c)) r.push_back(*d);
                else r.push_back(std::get<std::string>(c));
            }
            rows.push_back(r);
        }
        tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
    }
    j["tables"] = tables;
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : b.cells) cells.push_back(to_json(c));
    j["cells"] = cells;
    return j;
}

inline std::string to_json_string(const ReportBundle& b) { return to_json(b).dump(2) + "\n"; }

inline void write_json(const ReportBundle& bundle, const std::filesystem::path& path) {
    detail::write_file(path, to_json_string(bundle));
}

inline EstimateReport estimate_report_from_json(const nlohmann::ordered_json& j) {
    EstimateReport r;
    r.cell.estimator = j.at("estimator").get<std::string>();
    r.cell.n = detail::get_opt<int>(j, "n");
    r.cell.m = detail::get_opt<int>(j, "m");
    r.cell.epsilon = detail::get_opt<double>(j, "epsilon");
    r.truth = detail::get_opt<double>(j, "truth");
    r.replications = j.at("replications").get<std::size_t>();
    r.replicate_values = j.at("replicate_values").get<std::vector<double>>();
    for (const auto& f : j.at("failures"))
        r.failures.push_back({f.at("replication").get<std::size_t>(), f.at("reason").get<std::string>(),
                              f.at("message").get<std::string>()});
    r.mean = detail::get_opt<double>(j, "mean").value_or(0.0);
    r.mse = detail::get_opt<double>(j, "mse");
    r.variance = detail::get_opt<double>(j, "variance").value_or(0.0);
    if (const auto& bp = j.at("boxplot"); !bp.is_null())
        r.boxplot = {bp.at("min").get<double>(), bp.at("q1").get<double>(),  bp.at("median").get<double>(),
                     bp.at("q3").get<double>(),  bp.at("max").get<double>(), bp.at("mean").get<double>()};
    return r;
}

inline ReportBundle bundle_from_json(const nlohmann::ordered_json& j) {
    if (!j.contains("schema_version") || j.at("schema_version").get<int>() != kReportSchemaVersion)
        throw IoError("report: unsupported or missing schema_version");
    ReportBundle b;
    const auto& meta = j.at("metadata");
    b.metadata.tool = meta.at("tool").get<std::string>();
    b.metadata.version = meta.at("version").get<std::string>();
    b.metadata.experiment = meta.at("experiment").get<std::string>();
    b.metadata.seed = meta.at("seed").get<std::uint64_t>();
    b.metadata.timestamp = detail::get_opt<std::string>(meta, "timestamp");
    b.metadata.reference_value = detail::get_opt<double>(meta, "reference_value");
    b.metadata.notes = meta.at("notes").get<std::vector<std::string>>();
    b.metadata.config = meta.at("config");
    for (const auto& t : j.at("tables")) {
        CsvTable table;
        table.name = t.at("name").get<std::string>();
        table.columns = t.at("columns").get<std::vector<std::string>>();
        for (const auto& row : t.at("rows")) {
            std::vector<CsvCell> r;
            for (const auto& c : row) {
                if (c.is_number()) r.emplace_back(c.get<double>());
                else r.emplace_back(c.get<std::string>());
            }
            table.rows.push_back(std::move(r));
        }
        b.tables.push_back(std::move(table));
    }
    for (const auto& c : j.at("cells")) b.cells.push_back(estimate_report_from_json(c));
    return b;
}

inline ReportBundle read_json(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path);
    try {
        return bundle_from_json(nlohmann::ordered_json::parse(text));
    } catch (const nlohmann::ordered_json::exception& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

} // namespace hnequiv
