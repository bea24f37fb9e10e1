#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "hnequiv/condexp.hpp"
#include "hnequiv/simharness.hpp"
#include "oracles.hpp"

using namespace hnequiv;
using Catch::Approx;

namespace {

/// Replays recorded pairs in order; the Rng argument is ignored.
struct Replay {
    const std::vector<std::pair<double, double>>* pairs;
    std::size_t next = 0;
    std::pair<double, double> operator()(Rng&) { return (*pairs)[next++]; }
};

std::vector<std::pair<double, double>> record(std::size_t count, RngSeed seed) {
    auto sampler = bivariate_normal_pairs(0.5);
    Rng rng(seed);
    std::vector<std::pair<double, double>> out(count);
    for (auto& p : out) p = sampler(rng);
    return out;
}

} // namespace

TEST_CASE("query validation") {
    CHECK_THROWS_AS(CondExpQuery({}, 0.1, 1).validate(), DomainError);
    CHECK_THROWS_AS(CondExpQuery({0.0}, 0.0, 1).validate(), DomainError);
    CHECK_THROWS_AS(CondExpQuery({0.0}, 0.1, 0).validate(), DomainError);
    CHECK_THROWS_AS(estimate_cond_exp(bivariate_normal_pairs(0.5), {{1.0}, 0.1, 10}, 5, RngSeed{1}), DomainError);
}

TEST_CASE("constant response is reproduced exactly") {
    auto sampler = [](Rng& rng) { return std::pair<double, double>{rng.normal(), 2.375}; };
    const auto r = estimate_cond_exp(sampler, {{0.3}, 0.05, 200}, 1'000'000, RngSeed{4});
    CHECK(r.estimate == 2.375);
    CHECK(r.accepted == 200);
    CHECK(r.accepted <= r.drawn);
    CHECK(r.sum_weights == r.accepted);
    CHECK(r.status == CondExpStatus::Complete);
}

TEST_CASE("acceptance failures") {
    auto far = [](Rng& rng) { return std::pair<double, double>{100.0 + rng.uniform(), 1.0}; };
    CHECK_THROWS_AS(estimate_cond_exp(far, {{0.0}, 0.1, 5}, 1000, RngSeed{1}), InsufficientAcceptanceError);
    auto half = [](Rng& rng) { return std::pair<double, double>{rng.uniform(), 1.0}; };
    const auto r = estimate_cond_exp(half, {{0.0}, 0.1, 1000}, 1000, RngSeed{1});
    CHECK(r.status == CondExpStatus::Partial);
    CHECK(r.accepted > 0);
    CHECK(r.accepted < 1000);
    CHECK(r.drawn == 1000);
}

TEST_CASE("multivariate conditioning uses the sup norm") {
    auto sampler = [](Rng& rng) {
        const std::array<double, 2> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        return std::pair{x, x[0] + x[1]};
    };
    const auto r = estimate_cond_exp(sampler, {{0.5, -0.2}, 0.02, 2000}, 100'000'000, RngSeed{9});
    CHECK(r.estimate == Approx(0.3).margin(0.01));
    const std::array<double, 2> center{0.0, 0.0};
    CHECK(in_sup_ball(std::array{0.1, -0.1}, center, 0.1));
    CHECK_FALSE(in_sup_ball(std::array{0.1, -0.1000001}, center, 0.1));
}

TEST_CASE("estimate is determined by the seed") {
    const CondExpQuery q{{1.0}, 0.05, 500};
    const auto a = estimate_cond_exp(bivariate_normal_pairs(0.5), q, 100'000'000, RngSeed{7});
    const auto b = estimate_cond_exp(bivariate_normal_pairs(0.5), q, 100'000'000, RngSeed{7});
    CHECK(a.estimate == b.estimate);
    CHECK(a.drawn == b.drawn);
}

TEST_CASE("estimate lies within the accepted y range") {
    const auto pairs = record(200'000, RngSeed{12});
    double lo = INFINITY, hi = -INFINITY;
    std::size_t count = 0;
    const double center[1] = {1.0};
    for (const auto& [x, y] : pairs)
        if (in_sup_ball(x, center, 0.05)) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
            ++count;
        }
    const auto r = estimate_cond_exp(Replay{&pairs}, {{1.0}, 0.05, count}, pairs.size(), RngSeed{0});
    CHECK(r.estimate >= lo);
    CHECK(r.estimate <= hi);
}

TEST_CASE("acceptance is monotone in epsilon on a shared stream") {
    const auto pairs = record(100'000, RngSeed{13});
    const double center[1] = {1.0};
    std::size_t prev = 0;
    for (double eps : {0.001, 0.01, 0.05, 0.2}) {
        std::size_t count = 0;
        for (const auto& [x, y] : pairs) {
            const bool in = in_sup_ball(x, center, eps);
            if (in_sup_ball(x, center, eps * 0.5)) CHECK(in);
            count += in;
        }
        CHECK(count >= prev);
        prev = count;
        const auto r = estimate_cond_exp(bivariate_normal_pairs(0.5), {{1.0}, eps, 100'000}, 100'000, RngSeed{13});
        CHECK(r.accepted == count);
    }
}

TEST_CASE("Nadaraya-Watson box kernel identity is bit exact") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto pairs = record(50'000, RngSeed{seed});
        for (double h : {0.01, 0.1, 0.7}) {
            const double nw = nadaraya_watson_at(pairs, 1.0, h);
            std::size_t in = 0;
            const double center[1] = {1.0};
            for (const auto& [x, y] : pairs) in += in_sup_ball(x, center, h);
            const auto r = estimate_cond_exp(Replay{&pairs}, {{1.0}, h, in}, pairs.size(), RngSeed{0});
            CHECK(std::bit_cast<std::uint64_t>(r.estimate) == std::bit_cast<std::uint64_t>(nw));
        }
    }
}

TEST_CASE("Nadaraya-Watson small cases") {
    const std::vector<std::pair<double, double>> one{{0.4, 7.5}};
    CHECK(nadaraya_watson_at(one, 0.4, 0.1) == 7.5);
    const std::vector<std::pair<double, double>> sym{{-1.0, 1.0}, {1.0, 1.0}};
    CHECK(nadaraya_watson_at(sym, 0.0, 2.0) == 1.0);
    CHECK_THROWS_AS(nadaraya_watson_at(sym, 0.0, 0.5), InsufficientAcceptanceError);
    CHECK_THROWS_AS(nadaraya_watson_at(sym, 0.0, 0.0), DomainError);
}

TEST_CASE("ABC recovers the conjugate normal posterior") {
    auto prior = [](Rng& rng) { return rng.normal(); };
    auto data = [](double theta, Rng& rng) { return theta + rng.normal(); };
    const double observed[1] = {1.0};
    const auto r = abc_posterior(prior, data, observed, 0.01, [](double t) { return t; },
                                 [](double t) { return t > 0.5; }, 5'000'000, RngSeed{21});
    CHECK(r.posterior_mean_f == Approx(0.5).margin(0.02));
    CHECK(r.posterior_prob_T == Approx(0.5).margin(0.03));
    CHECK(r.accepted > 10'000);

    const auto all = abc_posterior(prior, data, observed, 0.05, [](double) { return 0.0; }, [](double) { return true; },
                                   200'000, RngSeed{22});
    CHECK(all.posterior_prob_T == 1.0);
    CHECK(all.posterior_mean_f == 0.0);
    CHECK_THROWS_AS(abc_posterior(prior, data, observed, 1e-12, [](double t) { return t; },
                                  [](double) { return true; }, 1000, RngSeed{23}),
                    InsufficientAcceptanceError);
}

TEST_CASE("bivariate normal regression line and its MSE trend") {
    std::array<double, 3> mses{};
    const std::array<int, 3> ms{100, 1000, 5000};
    for (std::size_t k = 0; k < 3; ++k) {
        std::vector<double> est;
        for (std::uint64_t r = 0; r < 100; ++r)
            est.push_back(estimate_cond_exp(bivariate_normal_pairs(0.5), {{1.0}, 0.1, static_cast<std::size_t>(ms[k])},
                                            1'000'000'000, derive_seed(RngSeed{5}, {k, r}))
                              .estimate);
        mses[k] = mse(est, 0.5);
        CHECK(std::abs(oracle::mean_se(est).mean - 0.5) < 0.03);
    }
    CHECK(mses[2] < mses[1]);
    CHECK(mses[1] < mses[0]);
}

TEST_CASE("trigonometric example at a single point") {
    const auto r = estimate_cond_exp(trig_transform_pairs(0.5), {{0.5}, 0.01, 5000}, 1'000'000'000, RngSeed{31});
    CHECK(r.estimate == Approx(0.1253).margin(0.01));
}
