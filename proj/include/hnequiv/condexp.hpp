#pragma once

// Monte Carlo conditional expectation by sup-norm ball averaging:
//
//   E(Y | X = x) ~ sum_i 1{|X_i - x|_inf <= eps} Y_i / sum_i 1{|X_i - x|_inf <= eps}
//
// drawing (X_i, Y_i) until a target number of points has landed in the ball.
// With a box kernel this is the Nadaraya-Watson estimate at x with bandwidth
// eps; with (theta, simulated data) pairs it is rejection ABC.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <ranges>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "hnequiv/errors.hpp"
#include "hnequiv/rng.hpp"

namespace hnequiv {

struct CondExpQuery {
    std::vector<double> x;          ///< conditioning point
    double epsilon = 0.01;          ///< sup-norm ball radius
    std::size_t target_in_ball = 1; ///< m, accepted points to collect

    void validate() const {
        if (x.empty()) throw DomainError("CondExpQuery: empty conditioning point");
        if (!(epsilon > 0.0)) throw DomainError("CondExpQuery: epsilon must be > 0");
        if (target_in_ball < 1) throw DomainError("CondExpQuery: target_in_ball must be >= 1");
    }
};

enum class CondExpStatus {
    Complete, ///< target_in_ball points accepted
    Partial,  ///< max_draws exhausted with 0 < accepted < target_in_ball
};

struct CondExpResult {
    double estimate = 0.0;
    std::size_t accepted = 0;
    std::size_t drawn = 0;
    std::size_t sum_weights = 0; ///< box kernel: equals accepted
    CondExpStatus status = CondExpStatus::Complete;
};

/// ||x - center||_inf <= eps
inline bool in_sup_ball(double x, std::span<const double> center, double eps) noexcept {
    return std::abs(x - center[0]) <= eps;
}

template <std::ranges::input_range R>
bool in_sup_ball(const R& x, std::span<const double> center, double eps) noexcept {
    std::size_t i = 0;
    for (double xi : x) {
        if (!(std::abs(xi - center[i]) <= eps)) return false;
        ++i;
    }
    return true;
}

/// Draws pairs from `sampler(rng)` (returning something destructurable as
/// [x, y], x scalar or range) until `query.target_in_ball` fall within the
/// ball or `max_draws` draws are spent.
template <class PairSampler>
CondExpResult estimate_cond_exp(PairSampler&& sampler, const CondExpQuery& query, std::uint64_t max_draws,
                                RngSeed seed) {
    query.validate();
    if (max_draws < query.target_in_ball) throw DomainError("estimate_cond_exp: max_draws < target_in_ball");
    Rng rng(seed);
    const std::span<const double> center(query.x);
    double numerator = 0.0;
    std::size_t accepted = 0;
    std::uint64_t drawn = 0;
    while (accepted < query.target_in_ball && drawn < max_draws) {
        const auto [x, y] = sampler(rng);
        ++drawn;
        if (in_sup_ball(x, center, query.epsilon)) {
            numerator += y;
            ++accepted;
        }
    }
    if (accepted == 0) {
        std::ostringstream msg;
        msg << "estimate_cond_exp: no draw within epsilon = " << query.epsilon << " after " << drawn << " draws";
        throw InsufficientAcceptanceError(msg.str());
    }
    CondExpResult result;
    result.estimate = numerator / static_cast<double>(accepted);
    result.accepted = accepted;
    result.drawn = drawn;
    result.sum_weights = accepted;
    result.status = accepted < query.target_in_ball ? CondExpStatus::Partial : CondExpStatus::Complete;
    return result;
}

/// Box-kernel (K = 1 on [-1, 1]) Nadaraya-Watson regression at x.
inline double nadaraya_watson_at(std::span<const std::pair<double, double>> pairs, double x, double bandwidth) {
    if (!(bandwidth > 0.0)) throw DomainError("nadaraya_watson_at: bandwidth must be > 0");
    const std::span<const double> center(&x, 1);
    double numerator = 0.0;
    std::size_t count = 0;
    for (const auto& [xi, yi] : pairs) {
        if (in_sup_ball(xi, center, bandwidth)) {
            numerator += yi;
            ++count;
        }
    }
    if (count == 0) throw InsufficientAcceptanceError("nadaraya_watson_at: no pair within the bandwidth window");
    return numerator / static_cast<double>(count);
}

struct AbcResult {
    double posterior_mean_f = 0.0;
    double posterior_prob_T = 0.0;
    std::size_t accepted = 0;
    std::size_t drawn = 0;
};

/// Rejection ABC: theta ~ prior_sampler(rng), x ~ data_sampler(theta, rng);
/// keep theta when x is within epsilon (sup norm) of observed_x. Returns the
/// accepted-sample mean of f(theta) and frequency of indicator(theta).
template <class Prior, class Data, class F, class Indicator>
AbcResult abc_posterior(Prior&& prior_sampler, Data&& data_sampler, std::span<const double> observed_x,
                        double epsilon, F&& f, Indicator&& indicator, std::uint64_t max_draws, RngSeed seed) {
    if (observed_x.empty()) throw DomainError("abc_posterior: empty observation");
    if (!(epsilon > 0.0)) throw DomainError("abc_posterior: epsilon must be > 0");
    Rng rng(seed);
    double sum_f = 0.0;
    std::size_t in_set = 0;
    std::size_t accepted = 0;
    for (std::uint64_t i = 0; i < max_draws; ++i) {
        const auto theta = prior_sampler(rng);
        const auto x = data_sampler(theta, rng);
        if (in_sup_ball(x, observed_x, epsilon)) {
            sum_f += f(theta);
            if (indicator(theta)) ++in_set;
            ++accepted;
        }
    }
    if (accepted == 0) throw InsufficientAcceptanceError("abc_posterior: no simulated data within epsilon");
    const double k = static_cast<double>(accepted);
    return {sum_f / k, static_cast<double>(in_set) / k, accepted, static_cast<std::size_t>(max_draws)};
}

// ---------------------------------------------------------------------------
// Pair streams used by the bivariate-normal studies

/// (X, Y) standard bivariate normal with correlation rho; yields [X, Y].
inline auto bivariate_normal_pairs(double rho) {
    if (!(std::abs(rho) < 1.0)) throw DomainError("bivariate_normal_pairs: need |rho| < 1");
    const double tail = std::sqrt(1.0 - rho * rho);
    return [rho, tail](Rng& rng) {
        const double x = rng.normal();
        const double y = rho * x + tail * rng.normal();
        return std::pair<double, double>{x, y};
    };
}

/// With (X, Y) as above, yields [U, V] = [cos(X^2 + Y^2), sin(X Y)].
inline auto trig_transform_pairs(double rho) {
    auto base = bivariate_normal_pairs(rho);
    return [base](Rng& rng) mutable {
        const auto [x, y] = base(rng);
        return std::pair<double, double>{std::cos(x * x + y * y), std::sin(x * y)};
    };
}

} // namespace hnequiv
