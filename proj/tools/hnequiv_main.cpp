// hnequiv: command-line front end for the half-normal estimator library.
//
// Exit status: 0 success, 1 runtime error, 2 usage error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hnequiv/hnequiv.hpp"

namespace {

using namespace hnequiv;

/// Bad flag values that only surface after parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TableOptions {
    std::uint64_t seed = kDefaultSeed;
    std::optional<std::size_t> reps;
    std::vector<double> eps;
    std::vector<int> n;
    std::vector<int> m;
    double xi = 10.0;
    double eta = 4.0;
    std::string out_dir = ".";
    std::string format = "csv";
    std::size_t jobs = 1;
    bool desk = false;
    std::optional<std::uint64_t> max_draws;
    std::string multiplier = "shared";
    double box_upper = 10.0;
};

void add_table_flags(CLI::App* cmd, TableOptions& o, Experiment e) {
    cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
    cmd->add_option("--reps", o.reps, "replications per cell");
    cmd->add_option("--out-dir", o.out_dir, "directory for report files")->capture_default_str();
    cmd->add_option("--format", o.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->capture_default_str();
    cmd->add_option("--jobs", o.jobs, "worker threads (never changes results)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    const bool cond = e == Experiment::Table1 || e == Experiment::Table2;
    if (e != Experiment::Table5) cmd->add_option("--eps", o.eps, "epsilon values (repeatable)");
    if (cond) {
        cmd->add_option("--m", o.m, "accepted-point targets (repeatable)");
        cmd->add_option("--max-draws", o.max_draws, "draw budget per query");
    } else {
        cmd->add_option("--n", o.n, "sample sizes (repeatable)");
        cmd->add_option("--xi", o.xi, "true location")->capture_default_str();
        cmd->add_option("--eta", o.eta, "true scale")->capture_default_str();
    }
    if (e == Experiment::Table3 || e == Experiment::Table4) {
        cmd->add_flag("--desk", o.desk, "use n = 50, 200, 500");
        cmd->add_option("--multiplier", o.multiplier, "Step A rescaling: shared or per_vector")
            ->check(CLI::IsMember({"shared", "per_vector"}))
            ->capture_default_str();
        cmd->add_option("--box-upper", o.box_upper, "Step A box edge")->capture_default_str();
    }
}

SimulationConfig table_config(Experiment e, const TableOptions& o) {
    auto c = SimulationConfig::study_defaults(e, o.desk);
    c.seed = RngSeed{o.seed};
    if (o.reps) c.replications = *o.reps;
    if (!o.eps.empty()) c.epsilon_values = o.eps;
    if (!o.n.empty()) c.n_values = o.n;
    if (!o.m.empty()) c.m_values = o.m;
    if (o.max_draws) c.max_draws = *o.max_draws;
    c.true_params = HalfNormalParams(o.xi, o.eta);
    c.jobs = o.jobs;
    c.multiplier = o.multiplier == "shared" ? MultiplierMode::Shared : MultiplierMode::PerVector;
    c.box_upper = o.box_upper;
    return c;
}

void print_table(const CsvTable& t) {
    std::vector<std::size_t> width(t.columns.size());
    std::vector<std::vector<std::string>> text;
    for (const auto& row : t.rows) {
        std::vector<std::string> r;
        for (const auto& c : row) {
            if (const auto* d = std::get_if<double>(&c)) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.6g", *d);
                r.emplace_back(buf);
            } else {
                r.push_back(std::get<std::string>(c));
            }
        }
        text.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        width[i] = t.columns[i].size();
        for (const auto& r : text) width[i] = std::max(width[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i)
            std::printf("%s%-*s", i ? "  " : "", static_cast<int>(width[i]), r[i].c_str());
        std::printf("\n");
    };
    line(t.columns);
    for (const auto& r : text) line(r);
}

int run_table(Experiment e, const TableOptions& o) {
    SimulationConfig cfg;
    try {
        cfg = table_config(e, o);
        cfg.validate();
    } catch (const DomainError& err) {
        throw UsageError(err.what());
    }
    const auto result = run_experiment(cfg);
    const auto bundle = make_bundle(result);
    const std::filesystem::path dir(o.out_dir);
    if (o.format != "json")
        for (const auto& p : write_csv(bundle, dir)) std::fprintf(stderr, "wrote %s\n", p.string().c_str());
    if (o.format != "csv") {
        const auto path = dir / (bundle.tables.front().name + ".json");
        write_json(bundle, path);
        std::fprintf(stderr, "wrote %s\n", path.string().c_str());
    }
    print_table(bundle.tables.front());
    std::size_t failed = 0;
    for (const auto& c : result.cells) failed += c.failures.size();
    if (failed) std::fprintf(stderr, "%zu replication(s) excluded; see the JSON report for reasons\n", failed);
    return 0;
}

/// One observation per line or comma/whitespace separated.
std::vector<double> read_observations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<double> values;
    std::string token;
    std::stringstream all;
    all << in.rdbuf();
    std::string text = all.str();
    for (char& c : text)
        if (c == ',' || c == ';') c = ' ';
    std::istringstream tokens(text);
    while (tokens >> token) {
        const auto v = parse_double(token);
        if (!v) throw IoError("'" + path + "': not a number: '" + token + "'");
        values.push_back(*v);
    }
    return values;
}

struct EstimateOptions {
    std::string file;
    std::optional<double> eta_known;
    std::optional<double> xi_known;
    double eps = 0.01;
    std::uint64_t seed = kDefaultSeed;
    std::size_t jobs = 1;
};

int run_estimate(const EstimateOptions& o) {
    const Sample s(read_observations(o.file));
    const int n = static_cast<int>(s.size());
    auto show = [](const char* name, double v) { std::printf("%-26s %.17g\n", name, v); };
    std::printf("n                          %d\n", n);
    const auto u = unbiased(s, half_min_constant(n));
    const auto ml = mle(s);
    show("xi_unbiased", *u.xi_hat);
    show("eta_unbiased", u.eta_hat);
    show("xi_mle", *ml.xi_hat);
    show("eta_mle", ml.eta_hat);
    show("eta_mre", mre_scale(s).eta_hat);
    StepAConfig step;
    step.epsilon = o.eps;
    step.seed = RngSeed{o.seed};
    step.jobs = o.jobs;
    const auto loc = mre_location_detail(s, step);
    show("xi_mre", loc.estimate);
    if (loc.epsilon_used != o.eps) std::fprintf(stderr, "note: epsilon clamped to %.17g for this sample\n", loc.epsilon_used);
    if (o.eta_known) show("xi_pitman_known_scale", pitman_location_known_scale(s, *o.eta_known));
    if (o.xi_known) {
        show("eta_mre_known_location", mre_scale_known_location(s, *o.xi_known));
        show("eta_umvu_known_location", umvu_scale_known_location(s, *o.xi_known));
    }
    return 0;
}

struct CondExpOptions {
    std::string model = "normal";
    double x = 1.0;
    double eps = 0.01;
    std::size_t m = 1000;
    double rho = 0.5;
    std::uint64_t max_draws = 1'000'000'000;
    std::uint64_t seed = kDefaultSeed;
};

int run_condexp(const CondExpOptions& o) {
    const CondExpQuery q{{o.x}, o.eps, o.m};
    const RngSeed seed{o.seed};
    const auto r = o.model == "normal" ? estimate_cond_exp(bivariate_normal_pairs(o.rho), q, o.max_draws, seed)
                                       : estimate_cond_exp(trig_transform_pairs(o.rho), q, o.max_draws, seed);
    std::printf("estimate  %.17g\naccepted  %zu\ndrawn     %zu\nstatus    %s\n", r.estimate, r.accepted, r.drawn,
                r.status == CondExpStatus::Complete ? "complete" : "partial");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Estimators for the location and scale of the general half-normal distribution"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::array<TableOptions, 5> table_opts;
    std::array<CLI::App*, 5> table_cmds{};
    const std::array<Experiment, 5> experiments{Experiment::Table1, Experiment::Table2, Experiment::Table3,
                                                Experiment::Table4, Experiment::Table5};
    const std::array<const char*, 5> blurbs{
        "E(Y | X = 1) for a correlated bivariate normal, by epsilon-ball averaging",
        "E(sin(XY) | cos(X^2 + Y^2) = 0.5), by epsilon-ball averaging",
        "MRE location approximation of HN(xi, eta)",
        "unbiased, MLE and MRE location estimators of HN(xi, eta) on shared samples",
        "unbiased, MLE and MRE scale estimators of HN(xi, eta)"};
    for (std::size_t i = 0; i < 5; ++i) {
        table_cmds[i] = app.add_subcommand(std::string(to_string(experiments[i])), blurbs[i]);
        add_table_flags(table_cmds[i], table_opts[i], experiments[i]);
    }

    EstimateOptions est;
    auto* estimate = app.add_subcommand("estimate", "apply every estimator to a data file");
    estimate->add_option("file", est.file, "observations, whitespace or comma separated")->required();
    estimate->add_option("--eta-known", est.eta_known, "known scale: adds the Pitman location estimator");
    estimate->add_option("--xi-known", est.xi_known, "known location: adds the MRE and UMVU scale estimators");
    estimate->add_option("--eps", est.eps, "Step A epsilon")->capture_default_str();
    estimate->add_option("--seed", est.seed, "Step A seed")->capture_default_str();
    estimate->add_option("--jobs", est.jobs, "worker threads")->check(CLI::PositiveNumber);

    CondExpOptions ce;
    auto* condexp = app.add_subcommand("condexp", "one epsilon-ball conditional expectation estimate");
    condexp->add_option("--model", ce.model, "normal: E(Y | X = x); trig: E(sin XY | cos(X^2+Y^2) = x)")
        ->check(CLI::IsMember({"normal", "trig"}))
        ->capture_default_str();
    condexp->add_option("--x", ce.x, "conditioning value")->capture_default_str();
    condexp->add_option("--eps", ce.eps, "ball radius")->capture_default_str();
    condexp->add_option("--m", ce.m, "accepted points")->capture_default_str();
    condexp->add_option("--rho", ce.rho, "correlation")->capture_default_str();
    condexp->add_option("--max-draws", ce.max_draws, "draw budget")->capture_default_str();
    condexp->add_option("--seed", ce.seed, "seed")->capture_default_str();

    std::vector<int> cn_values;
    auto* cn = app.add_subcommand("cn", "the constant c_n = E min of n standard half-normals");
    cn->add_option("--n", cn_values, "sample sizes (repeatable)")->required()->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (std::size_t i = 0; i < 5; ++i)
            if (table_cmds[i]->parsed()) return run_table(experiments[i], table_opts[i]);
        if (estimate->parsed()) return run_estimate(est);
        if (condexp->parsed()) return run_condexp(ce);
        if (cn->parsed()) {
            for (int n : cn_values) std::printf("%d %.17g\n", n, half_min_constant(n));
            return 0;
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
