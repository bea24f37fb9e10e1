#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "hnequiv/dist.hpp"
#include "hnequiv/quadrature.hpp"
#include "oracles.hpp"

using namespace hnequiv;
using Catch::Approx;

TEST_CASE("params validation") {
    CHECK_THROWS_AS(HalfNormalParams(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(HalfNormalParams(0.0, -1.0), DomainError);
    CHECK_THROWS_AS(HalfNormalParams(NAN, 1.0), DomainError);
    CHECK_NOTHROW(HalfNormalParams(-3.0, 0.5));
}

TEST_CASE("pdf values") {
    CHECK(pdf({0.0, 1.0}, 0.0) == Approx(0.7978845608028654).epsilon(1e-15));
    CHECK(pdf({10.0, 4.0}, 9.99) == 0.0);
    CHECK(pdf({10.0, 4.0}, 14.0) == Approx(0.25 * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("pdf integrates to one and cdf is its integral") {
    for (const HalfNormalParams p : {HalfNormalParams{0.0, 1.0}, HalfNormalParams{10.0, 4.0}, HalfNormalParams{-2.0, 0.1}}) {
        auto f = [&p](double y) { return pdf(p, y); };
        CHECK(std::abs(integrate(f, p.xi, p.xi + 40.0 * p.eta).value - 1.0) < 1e-10);
        for (double z : {0.1, 1.0, 2.5}) {
            const double y = p.xi + z * p.eta;
            CHECK(cdf(p, y) == Approx(integrate(f, p.xi, y).value).epsilon(1e-12));
        }
        CHECK(cdf(p, p.xi - 1.0) == 0.0);
    }
}

TEST_CASE("mean and variance formulas") {
    const auto a = mean_var({0.0, 1.0});
    CHECK(a.mean == Approx(0.79788).margin(1e-5));
    CHECK(a.variance == Approx(0.36338).margin(1e-5));
    const auto b = mean_var({10.0, 4.0});
    CHECK(b.mean == Approx(13.19154).margin(1e-5));
    CHECK(b.variance == Approx(5.81408).margin(1e-5));
}

TEST_CASE("mean and variance match a large sample") {
    const HalfNormalParams p{5.0, 2.0};
    const auto s = sample(p, 1'000'000, RngSeed{11});
    const auto mv = mean_var(p);
    const double n = 1e6;
    CHECK(std::abs(s.mean() - mv.mean) < 4.0 * std::sqrt(mv.variance / n));
    // Var(S^2) ~ (mu4 - sigma^4) / n with mu4 = eta^4 (3 - 2 m^2 - 3 m^4), m = E|Z|
    const double m = std::sqrt(2.0 / std::numbers::pi);
    const double mu4 = 16.0 * (3.0 - 2.0 * m * m - 3.0 * m * m * m * m);
    const double se_var = std::sqrt((mu4 - mv.variance * mv.variance) / n);
    CHECK(std::abs(s.variance() - mv.variance) < 4.0 * se_var);
}

TEST_CASE("sample summaries equal direct recomputation") {
    const auto s = sample({10.0, 4.0}, 1000, RngSeed{3});
    double sum = 0.0, mn = s[0];
    for (double v : s.values()) {
        sum += v;
        mn = std::min(mn, v);
    }
    const double mean = sum / 1000.0;
    double ss = 0.0, ad = 0.0;
    for (double v : s.values()) {
        ss += (v - mean) * (v - mean);
        ad += std::abs(v - mean);
    }
    CHECK(s.mean() == Approx(mean).epsilon(1e-12));
    CHECK(s.min() == mn);
    CHECK(s.variance() == Approx(ss / 999.0).epsilon(1e-12));
    CHECK(s.mean_abs_dev() == Approx(ad / 1000.0).epsilon(1e-12));
    CHECK(s.min() <= s.mean());
    CHECK(s.min() >= 10.0);
}

TEST_CASE("sample rejects bad inputs") {
    CHECK_THROWS_AS(Sample({1.0}), DomainError);
    CHECK_THROWS_AS(Sample({1.0, INFINITY}), DomainError);
    CHECK_THROWS_AS(sample({0.0, 1.0}, 1, RngSeed{1}), DomainError);
}

TEST_CASE("sampling is deterministic and location-scale exact") {
    const auto a = sample({0.0, 1.0}, 500, RngSeed{99});
    const auto b = sample({0.0, 1.0}, 500, RngSeed{99});
    const auto c = sample({10.0, 4.0}, 500, RngSeed{99});
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(a[i] == b[i]);
        CHECK(c[i] == 10.0 + 4.0 * a[i]);
    }
    const auto d = sample({0.0, 1.0}, 500, RngSeed{100});
    CHECK(d[0] != a[0]);
}

TEST_CASE("sample mean lies in the CLT band") {
    const auto s = sample({0.0, 1.0}, 1'000'000, RngSeed{5});
    const double sigma = std::sqrt(mean_var({0.0, 1.0}).variance);
    CHECK(std::abs(s.mean() - std::sqrt(2.0 / std::numbers::pi)) < 4.0 * sigma / 1000.0);
}

TEST_CASE("Kolmogorov-Smirnov against 2 Phi - 1") {
    const auto s = sample({10.0, 4.0}, 100'000, RngSeed{2024});
    std::vector<double> z(s.values().begin(), s.values().end());
    for (double& v : z) v = (v - 10.0) / 4.0;
    const double d = oracle::ks_statistic(z, [](double x) { return static_cast<double>(2.0L * oracle::phi_series(x) - 1.0L); });
    CHECK(d < 1.63 / std::sqrt(1e5));
}

TEST_CASE("expected minimum is xi + eta c_n") {
    for (int n : {2, 5, 10}) {
        std::vector<double> mins;
        for (std::uint64_t r = 0; r < 100'000; ++r) mins.push_back(sample({10.0, 4.0}, n, derive_seed(RngSeed{8}, {static_cast<std::uint64_t>(n), r})).min());
        const auto ms = oracle::mean_se(mins);
        INFO("n " << n);
        CHECK(std::abs(ms.mean - (10.0 + 4.0 * half_min_constant(n))) < 4.0 * ms.se);
    }
}

TEST_CASE("bivariate normal sampler") {
    CHECK_THROWS_AS(sample_bivariate_normal(1.0, 10, RngSeed{1}), DomainError);
    for (double rho : {0.0, 0.5}) {
        const auto pairs = sample_bivariate_normal(rho, 1'000'000, RngSeed{42});
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (auto [x, y] : pairs) {
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        const double n = 1e6;
        const double cov = sxy / n - sx / n * sy / n;
        const double r = cov / std::sqrt((sxx / n - sx * sx / n / n) * (syy / n - sy * sy / n / n));
        CHECK(std::abs(r - rho) < 4.0 / 1000.0);
        if (rho == 0.5) {
            std::vector<double> xs;
            for (std::size_t i = 0; i < 100'000; ++i) xs.push_back(pairs[i].first);
            CHECK(oracle::ks_statistic(xs, [](double x) { return static_cast<double>(oracle::phi_series(x)); }) <
                  1.63 / std::sqrt(1e5));
        }
    }
    const auto a = sample_bivariate_normal(0.3, 10, RngSeed{6});
    const auto b = sample_bivariate_normal(0.3, 10, RngSeed{6});
    CHECK(a == b);
}
