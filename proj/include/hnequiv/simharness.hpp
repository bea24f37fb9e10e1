#pragma once

// Seeded replication engine for the estimator studies.
//
// Every replication draws from its own stream, derived from the master seed
// and the cell's content key (study, n or m, epsilon, replication index), so
// results do not depend on worker count or on the order cells are run in.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hnequiv/condexp.hpp"
#include "hnequiv/dist.hpp"
#include "hnequiv/errors.hpp"
#include "hnequiv/estimators.hpp"
#include "hnequiv/mre_location.hpp"
#include "hnequiv/rng.hpp"
#include "hnequiv/specfun.hpp"

namespace hnequiv {

inline constexpr std::uint64_t kDefaultSeed = 20140527;

enum class Experiment { Table1, Table2, Table3, Table4, Table5, Custom };

inline std::string_view to_string(Experiment e) noexcept {
    switch (e) {
    case Experiment::Table1: return "table1";
    case Experiment::Table2: return "table2";
    case Experiment::Table3: return "table3";
    case Experiment::Table4: return "table4";
    case Experiment::Table5: return "table5";
    case Experiment::Custom: return "custom";
    }
    return "unknown";
}

inline Experiment experiment_from_string(std::string_view name) {
    for (auto e : {Experiment::Table1, Experiment::Table2, Experiment::Table3, Experiment::Table4,
                   Experiment::Table5, Experiment::Custom})
        if (to_string(e) == name) return e;
    throw DomainError("unknown experiment '" + std::string(name) + "'");
}

struct SimulationConfig {
    Experiment experiment = Experiment::Table5;
    RngSeed seed{kDefaultSeed};
    std::size_t replications = 1000;
    std::vector<int> n_values;           ///< sample sizes (tables 3-5, custom)
    std::vector<int> m_values;           ///< accepted-point targets (tables 1-2)
    std::vector<double> epsilon_values;  ///< ball radii (tables 1-4)
    HalfNormalParams true_params{10.0, 4.0};
    std::uint64_t max_draws = 1'000'000'000; ///< per conditional-expectation query
    double correlation = 0.5;                ///< of the bivariate normal in tables 1-2
    double box_upper = 10.0;
    MultiplierMode multiplier = MultiplierMode::Shared;
    std::size_t reference_m = 50000;     ///< table 2 dense reference run
    double reference_epsilon = 0.005;
    std::size_t jobs = 1;

    /// Configurations of the published studies. `desk` swaps the
    /// n = {100, 1000, 5000} sample sizes of tables 3-4 for {50, 200, 500}.
    static SimulationConfig study_defaults(Experiment e, bool desk = false) {
        SimulationConfig c;
        c.experiment = e;
        switch (e) {
        case Experiment::Table1:
        case Experiment::Table2:
            c.replications = 100;
            c.m_values = {100, 1000, 5000};
            c.epsilon_values = {0.1, 0.01};
            break;
        case Experiment::Table3:
        case Experiment::Table4:
            c.replications = 100;
            c.n_values = desk ? std::vector<int>{50, 200, 500} : std::vector<int>{100, 1000, 5000};
            c.epsilon_values = {0.1, 0.01};
            break;
        case Experiment::Table5:
            c.replications = 1000;
            c.n_values = {10, 20, 30};
            break;
        case Experiment::Custom:
            c.replications = 1000;
            c.n_values = {10};
            break;
        }
        return c;
    }

    void validate() const {
        auto fail = [](const std::string& what) { throw DomainError("SimulationConfig: " + what); };
        if (replications < 2) fail("replications must be >= 2");
        if (jobs < 1) fail("jobs must be >= 1");
        const bool uses_m = experiment == Experiment::Table1 || experiment == Experiment::Table2;
        if (uses_m && m_values.empty()) fail("m_values must be non-empty");
        if (!uses_m && n_values.empty()) fail("n_values must be non-empty");
        for (int m : m_values)
            if (m < 1) fail("m values must be >= 1");
        for (int n : n_values)
            if (n < (experiment == Experiment::Table5 || experiment == Experiment::Custom ? 3 : 2))
                fail("n value " + std::to_string(n) + " too small");
        const bool uses_eps = uses_m || experiment == Experiment::Table3 || experiment == Experiment::Table4;
        if (uses_eps && epsilon_values.empty()) fail("epsilon_values must be non-empty");
        for (double e : epsilon_values)
            if (!(e > 0.0)) fail("epsilon values must be > 0");
        if (!(std::abs(correlation) < 1.0)) fail("correlation must lie in (-1, 1)");
        if (!(box_upper > 0.0)) fail("box_upper must be > 0");
        for (int m : m_values)
            if (max_draws < static_cast<std::uint64_t>(m)) fail("max_draws must be >= every m");
    }
};

// ---------------------------------------------------------------------------
// Summaries

/// Quantile with linear interpolation between closest ranks (inclusive;
/// position p (k - 1) in the sorted values).
inline double quantile_linear(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile_linear: empty input");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct BoxPlot {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};

inline double mean_of(std::span<const double> values) {
    if (values.empty()) throw DomainError("mean: empty input");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

/// (1/k) sum (v_i - truth)^2
inline double mse(std::span<const double> values, double truth) {
    if (values.empty()) throw DomainError("mse: empty input");
    double sum = 0.0;
    for (double v : values) sum += (v - truth) * (v - truth);
    return sum / static_cast<double>(values.size());
}

/// Sample variance with divisor k - 1 (0 for a single value).
inline double sample_variance(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size() - 1);
}

inline BoxPlot five_number_summary(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return {sorted.front(),
            quantile_linear(sorted, 0.25),
            quantile_linear(sorted, 0.5),
            quantile_linear(sorted, 0.75),
            sorted.back(),
            mean_of(values)};
}

// ---------------------------------------------------------------------------
// Reports

struct CellId {
    std::string estimator;
    std::optional<int> n;
    std::optional<int> m;
    std::optional<double> epsilon;

    std::string key() const {
        std::ostringstream k;
        k << estimator;
        if (epsilon) k << "/eps=" << *epsilon;
        if (m) k << "/m=" << *m;
        if (n) k << "/n=" << *n;
        return k.str();
    }
    friend bool operator==(const CellId&, const CellId&) = default;
};

struct FailureRecord {
    std::size_t replication = 0;
    std::string reason;  ///< Error::code() of the exception
    std::string message;
};

struct EstimateReport {
    CellId cell;
    std::optional<double> truth;
    std::size_t replications = 0; ///< attempted
    std::vector<double> replicate_values; ///< successful replications, by index
    std::vector<FailureRecord> failures;
    double mean = 0.0;
    std::optional<double> mse; ///< present when truth is
    double variance = 0.0;     ///< sample variance of replicate_values
    BoxPlot boxplot;
};

inline EstimateReport aggregate(CellId cell, std::optional<double> truth, std::size_t replications,
                                std::vector<double> values, std::vector<FailureRecord> failures) {
    EstimateReport r;
    r.cell = std::move(cell);
    r.truth = truth;
    r.replications = replications;
    r.failures = std::move(failures);
    r.replicate_values = std::move(values);
    if (!r.replicate_values.empty()) {
        r.mean = mean_of(r.replicate_values);
        if (truth) r.mse = mse(r.replicate_values, *truth);
        r.variance = sample_variance(r.replicate_values);
        r.boxplot = five_number_summary(r.replicate_values);
    }
    return r;
}

struct ExperimentResult {
    SimulationConfig config;
    std::vector<EstimateReport> cells;
    std::optional<double> reference_value; ///< table 2 dense run
    std::vector<std::string> notes;

    const EstimateReport& cell(const CellId& id) const {
        for (const auto& c : cells)
            if (c.cell == id) return c;
        throw DomainError("no cell " + id.key());
    }
};

// ---------------------------------------------------------------------------
// Replication runner

struct ReplicationOutcome {
    std::vector<double> values; ///< one per estimator sharing the replication
    std::optional<FailureRecord> failure;
};

/// Runs fn(rep) for rep in [0, count) on `jobs` threads. Errors thrown by fn
/// are recorded against that replication. Output is indexed by rep.
template <class Fn>
std::vector<ReplicationOutcome> run_replications(std::size_t count, std::size_t jobs, Fn&& fn) {
    std::vector<ReplicationOutcome> out(count);
    auto run_one = [&](std::size_t rep) {
        try {
            out[rep].values = fn(rep);
        } catch (const Error& e) {
            out[rep].failure = FailureRecord{rep, std::string(e.code()), e.what()};
        } catch (const std::exception& e) {
            out[rep].failure = FailureRecord{rep, "other", e.what()};
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t rep = 0; rep < count; ++rep) run_one(rep);
        return out;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> workers;
        for (std::size_t w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t rep = next++; rep < count; rep = next++) run_one(rep);
            });
    }
    return out;
}

/// Splits per-replication outcomes into one report per estimator.
inline std::vector<EstimateReport> collect(const std::vector<ReplicationOutcome>& outcomes,
                                           const std::vector<CellId>& cells, std::optional<double> truth) {
    std::vector<std::vector<double>> values(cells.size());
    std::vector<FailureRecord> failures;
    for (const auto& o : outcomes) {
        if (o.failure) {
            failures.push_back(*o.failure);
            continue;
        }
        for (std::size_t k = 0; k < cells.size(); ++k) values[k].push_back(o.values.at(k));
    }
    std::vector<EstimateReport> reports;
    for (std::size_t k = 0; k < cells.size(); ++k)
        reports.push_back(aggregate(cells[k], truth, outcomes.size(), std::move(values[k]), failures));
    return reports;
}

namespace detail {

inline constexpr std::uint64_t kTagCondExp1 = 0x5431;  // "T1"
inline constexpr std::uint64_t kTagCondExp2 = 0x5432;  // "T2"
inline constexpr std::uint64_t kTagReference = 0x524546; // "REF"
inline constexpr std::uint64_t kTagLocation = 0x4C4F43;  // "LOC", shared by tables 3 and 4
inline constexpr std::uint64_t kTagScale = 0x5343;       // "SC"
inline constexpr std::uint64_t kTagCustom = 0x435553;    // "CUS"

inline std::vector<double> condexp_replication(Experiment e, const SimulationConfig& cfg, double eps, int m,
                                               std::size_t rep) {
    const bool first = e == Experiment::Table1;
    const RngSeed seed =
        derive_seed(cfg.seed, {first ? kTagCondExp1 : kTagCondExp2, seed_tag(eps), static_cast<std::uint64_t>(m), rep});
    const CondExpQuery q{{first ? 1.0 : 0.5}, eps, static_cast<std::size_t>(m)};
    const CondExpResult r = first ? estimate_cond_exp(bivariate_normal_pairs(cfg.correlation), q, cfg.max_draws, seed)
                                  : estimate_cond_exp(trig_transform_pairs(cfg.correlation), q, cfg.max_draws, seed);
    if (r.status == CondExpStatus::Partial) {
        std::ostringstream msg;
        msg << "only " << r.accepted << " of " << m << " points accepted in " << r.drawn << " draws";
        throw InsufficientAcceptanceError(msg.str());
    }
    return {r.estimate};
}

inline StepAConfig step_a_config(const SimulationConfig& cfg, double eps, RngSeed seed) {
    StepAConfig s;
    s.epsilon = eps;
    s.box_upper = cfg.box_upper;
    s.seed = seed;
    s.multiplier = cfg.multiplier;
    return s;
}

} // namespace detail

/// Runs every cell of the configured study.
inline ExperimentResult run_experiment(const SimulationConfig& cfg) {
    cfg.validate();
    ExperimentResult result;
    result.config = cfg;
    const std::size_t reps = cfg.replications;
    const auto& truth = cfg.true_params;

    switch (cfg.experiment) {
    case Experiment::Table1:
    case Experiment::Table2: {
        std::optional<double> target;
        if (cfg.experiment == Experiment::Table1) {
            target = cfg.correlation * 1.0; // E(Y | X = 1) = rho
            result.notes.push_back("estimate of E(Y | X = 1), (X, Y) standard bivariate normal with correlation " +
                                   std::to_string(cfg.correlation));
        } else {
            const RngSeed seed = derive_seed(cfg.seed, {detail::kTagCondExp2, detail::kTagReference});
            const CondExpQuery q{{0.5}, cfg.reference_epsilon, cfg.reference_m};
            const auto ref = estimate_cond_exp(trig_transform_pairs(cfg.correlation), q, cfg.max_draws, seed);
            result.reference_value = ref.estimate;
            target = ref.estimate;
            std::ostringstream note;
            note.precision(17);
            note << "estimate of E(sin(XY) | cos(X^2 + Y^2) = 0.5); mse is taken against a dense reference run (m = "
                 << cfg.reference_m << ", eps = " << cfg.reference_epsilon << ") = " << ref.estimate
                 << "; variance is the sample variance of the replicates";
            result.notes.push_back(note.str());
        }
        result.notes.push_back("draws are independent across epsilon values and m values");
        for (double eps : cfg.epsilon_values)
            for (int m : cfg.m_values) {
                auto outcomes = run_replications(reps, cfg.jobs, [&](std::size_t rep) {
                    return detail::condexp_replication(cfg.experiment, cfg, eps, m, rep);
                });
                auto cells = collect(outcomes, {CellId{"cond_exp", std::nullopt, m, eps}}, target);
                result.cells.push_back(std::move(cells.front()));
            }
        break;
    }
    case Experiment::Table3:
    case Experiment::Table4: {
        const bool all_three = cfg.experiment == Experiment::Table4;
        result.notes.push_back("columns are sample sizes n; every estimator in a cell sees the same samples");
        for (double eps : cfg.epsilon_values)
            for (int n : cfg.n_values) {
                const double c_n = half_min_constant(n);
                auto outcomes = run_replications(reps, cfg.jobs, [&](std::size_t rep) {
                    const std::uint64_t un = static_cast<std::uint64_t>(n);
                    const auto s = sample(truth, n, derive_seed(cfg.seed, {detail::kTagLocation, un, seed_tag(eps), rep, 0}));
                    const RngSeed step_seed = derive_seed(cfg.seed, {detail::kTagLocation, un, seed_tag(eps), rep, 1});
                    const double mre = mre_location_approx(s, detail::step_a_config(cfg, eps, step_seed));
                    if (!all_three) return std::vector<double>{mre};
                    return std::vector<double>{*unbiased(s, c_n).xi_hat, *hnequiv::mle(s).xi_hat, mre};
                });
                std::vector<CellId> ids;
                if (all_three) {
                    ids.push_back({"unbiased", n, std::nullopt, eps});
                    ids.push_back({"mle", n, std::nullopt, eps});
                }
                ids.push_back({"mre", n, std::nullopt, eps});
                for (auto& c : collect(outcomes, ids, truth.xi)) result.cells.push_back(std::move(c));
            }
        break;
    }
    case Experiment::Table5: {
        for (int n : cfg.n_values) {
            const double c_n = half_min_constant(n);
            auto outcomes = run_replications(reps, cfg.jobs, [&](std::size_t rep) {
                const auto s = sample(truth, n, derive_seed(cfg.seed, {detail::kTagScale, static_cast<std::uint64_t>(n), rep}));
                return std::vector<double>{unbiased(s, c_n).eta_hat, hnequiv::mle(s).eta_hat, mre_scale(s).eta_hat};
            });
            auto cells = collect(outcomes,
                                 {CellId{"unbiased", n, std::nullopt, std::nullopt},
                                  CellId{"mle", n, std::nullopt, std::nullopt}, CellId{"mre", n, std::nullopt, std::nullopt}},
                                 truth.eta);
            for (auto& c : cells) result.cells.push_back(std::move(c));
        }
        break;
    }
    case Experiment::Custom: {
        result.notes.push_back("known-parameter estimators use the true xi (location) or eta (scale)");
        for (int n : cfg.n_values) {
            const double c_n = half_min_constant(n);
            const std::uint64_t un = static_cast<std::uint64_t>(n);
            auto outcomes = run_replications(reps, cfg.jobs, [&](std::size_t rep) {
                const auto s = sample(truth, n, derive_seed(cfg.seed, {detail::kTagCustom, un, rep}));
                const auto u = unbiased(s, c_n);
                const auto ml = hnequiv::mle(s);
                std::vector<double> v{*u.xi_hat,
                                      *ml.xi_hat,
                                      pitman_location_known_scale(s, truth.eta),
                                      u.eta_hat,
                                      ml.eta_hat,
                                      mre_scale(s).eta_hat,
                                      mre_scale_known_location(s, truth.xi),
                                      umvu_scale_known_location(s, truth.xi)};
                for (double eps : cfg.epsilon_values)
                    v.push_back(mre_location_approx(
                        s, detail::step_a_config(cfg, eps, derive_seed(cfg.seed, {detail::kTagCustom, un, rep, seed_tag(eps)}))));
                return v;
            });
            const auto id = [n](const char* name, std::optional<double> eps = std::nullopt) {
                return CellId{name, n, std::nullopt, eps};
            };
            auto xi_cells = collect(outcomes, {id("xi_unbiased"), id("xi_mle"), id("xi_pitman_known_scale")}, truth.xi);
            // scale estimators read columns 3..7 of the same outcomes
            std::vector<ReplicationOutcome> shifted = outcomes;
            for (auto& o : shifted)
                if (!o.failure) o.values.erase(o.values.begin(), o.values.begin() + 3);
            auto eta_cells = collect(shifted,
                                     {id("eta_unbiased"), id("eta_mle"), id("eta_mre"), id("eta_mre_known_location"),
                                      id("eta_umvu_known_location")},
                                     truth.eta);
            for (auto& c : xi_cells) result.cells.push_back(std::move(c));
            for (auto& c : eta_cells) result.cells.push_back(std::move(c));
            if (!cfg.epsilon_values.empty()) {
                for (auto& o : shifted)
                    if (!o.failure) o.values.erase(o.values.begin(), o.values.begin() + 5);
                std::vector<CellId> mre_ids;
                for (double eps : cfg.epsilon_values) mre_ids.push_back(id("xi_mre", eps));
                for (auto& c : collect(shifted, mre_ids, truth.xi)) result.cells.push_back(std::move(c));
            }
        }
        break;
    }
    }
    return result;
}

} // namespace hnequiv
