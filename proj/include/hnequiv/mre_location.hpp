#pragma once

// Approximate MRE location estimator under loss (x - xi)^2 / eta^2:
//
//   xi_mre = T0* - rho(U) T1*,   rho(U) = E(T0* T1* | U) / E(T1*^2 | U)   (xi = 0, eta = 1)
//
// with T0* the sample mean, T1* the mean absolute deviation and U the maximal
// invariant of the location-scale group. rho(U) is approximated by
//
//   C(y) = sum_{w in S} f(w) / sum_{w in S} g(w),
//   f(w) = T0*(w) T1*(w) exp(-|w|^2/2),  g(w) = T1*(w)^2 exp(-|w|^2/2),
//
// where S holds vectors of [0, box]^n whose invariant is within epsilon of
// U(y). S is built constructively (Step A) instead of by rejection, which
// would accept essentially nothing once n is moderately large.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <thread>
#include <vector>

#include "hnequiv/dist.hpp"
#include "hnequiv/errors.hpp"
#include "hnequiv/rng.hpp"

namespace hnequiv {

/// U(y): entries 0..n-3 are (y_i - y_n)/(y_{n-1} - y_n), the last entry is
/// sign(y_{n-1} - y_n).
struct MaximalInvariant {
    std::vector<double> u;

    std::span<const double> ratios() const noexcept { return std::span<const double>(u).first(u.size() - 1); }
    double sign() const noexcept { return u.back(); }
    std::size_t sample_size() const noexcept { return u.size() + 1; }
};

inline MaximalInvariant maximal_invariant(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 2) throw DomainError("maximal_invariant: need n >= 2");
    const double last = y[n - 1];
    const double gap = y[n - 2] - last;
    if (gap == 0.0) throw TieError("maximal_invariant: Y_{n-1} == Y_n");
    MaximalInvariant inv;
    inv.u.resize(n - 1);
    for (std::size_t i = 0; i + 2 < n; ++i) inv.u[i] = (y[i] - last) / gap;
    inv.u[n - 2] = gap > 0.0 ? 1.0 : -1.0;
    return inv;
}

inline MaximalInvariant maximal_invariant(const Sample& s) { return maximal_invariant(s.values()); }

/// max_i |U_i(w) - U_i(reference)| over all n-1 entries; +inf if w has a tie.
inline double invariant_distance(std::span<const double> w, const MaximalInvariant& reference) {
    const std::size_t n = w.size();
    if (n != reference.sample_size()) throw DomainError("invariant_distance: size mismatch");
    const double gap = w[n - 2] - w[n - 1];
    if (gap == 0.0) return std::numeric_limits<double>::infinity();
    double dist = std::abs((gap > 0.0 ? 1.0 : -1.0) - reference.sign());
    const auto ratios = reference.ratios();
    for (std::size_t i = 0; i + 2 < n; ++i) dist = std::max(dist, std::abs((w[i] - w[n - 1]) / gap - ratios[i]));
    return dist;
}

// ---------------------------------------------------------------------------
// Integrands

/// log g(w) = 2 log T1*(w) - |w|^2/2 and log |f(w)| = log|T0*(w)| + log T1*(w) - |w|^2/2.
struct IntegrandLogs {
    double log_abs_f;
    double f_sign;
    double log_g;
};

inline IntegrandLogs integrand_logs_from_moments(double mean, double mean_abs_dev, double sum_sq) noexcept {
    const double half_norm = 0.5 * sum_sq;
    const double log_t1 = std::log(mean_abs_dev);
    return {std::log(std::abs(mean)) + log_t1 - half_norm, mean < 0.0 ? -1.0 : 1.0, 2.0 * log_t1 - half_norm};
}

inline IntegrandLogs integrand_logs(std::span<const double> w) {
    if (w.size() < 2) throw DomainError("rho integrand: need at least 2 coordinates");
    const double n = static_cast<double>(w.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double v : w) {
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    double abs_dev = 0.0;
    for (double v : w) abs_dev += std::abs(v - mean);
    return integrand_logs_from_moments(mean, abs_dev / n, sum_sq);
}

/// f(w) = T0*(w) T1*(w) exp(-|w|^2 / 2)
inline double rho_integrand_f(std::span<const double> w) {
    const auto l = integrand_logs(w);
    return l.f_sign * std::exp(l.log_abs_f);
}

/// g(w) = T1*(w)^2 exp(-|w|^2 / 2)
inline double rho_integrand_g(std::span<const double> w) { return std::exp(integrand_logs(w).log_g); }

/// sum_j f_j / sum_j g_j from log magnitudes, scaled by the largest term so
/// neither sum underflows. `log_shift` is added to every log (test hook; the
/// result is invariant to it).
inline double log_sum_ratio(std::span<const IntegrandLogs> terms, double log_shift = 0.0) {
    double peak = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) peak = std::max({peak, t.log_g + log_shift, t.log_abs_f + log_shift});
    if (!std::isfinite(peak))
        throw DegenerateSampleError("rho approximation: every g(w) is zero (T1*(w) = 0 for all w)");
    double num = 0.0;
    double den = 0.0;
    for (const auto& t : terms) {
        num += t.f_sign * std::exp(t.log_abs_f + log_shift - peak);
        den += std::exp(t.log_g + log_shift - peak);
    }
    if (!(den > 0.0)) throw DegenerateSampleError("rho approximation: denominator sum is zero");
    return num / den;
}

// ---------------------------------------------------------------------------
// Step A sampler

/// How the A.2.2 rescaling multiplier is drawn.
enum class MultiplierMode {
    Shared,    ///< one multiplier, uniform on (0, box_upper], for the whole set S
    PerVector, ///< an independent multiplier for every vector
};

struct StepAConfig {
    double epsilon = 0.01;
    std::size_t per_sample_count = 0; ///< vectors in S; 0 selects 100 n
    double box_upper = 10.0;          ///< S lies in [0, box_upper]^n
    RngSeed seed{};
    /// When epsilon violates the admissible bound for this sample, shrink it
    /// to min(epsilon, 0.1, min|a_i| / 2) instead of throwing.
    bool clamp_epsilon = true;
    MultiplierMode multiplier = MultiplierMode::Shared;
    std::size_t jobs = 1; ///< worker threads for vector generation; never changes results

    std::size_t count_for(std::size_t n) const noexcept { return per_sample_count ? per_sample_count : 100 * n; }
};

/// Step A admits 0 < epsilon <= 0.1 with epsilon < min_i |a_i|. Returns min_i |a_i|
/// (+inf when n = 2).
inline double min_abs_ratio(const MaximalInvariant& inv) noexcept {
    double m = std::numeric_limits<double>::infinity();
    for (double a : inv.ratios()) m = std::min(m, std::abs(a));
    return m;
}

inline double resolve_epsilon(const StepAConfig& cfg, const MaximalInvariant& inv) {
    if (!(cfg.epsilon > 0.0)) throw DomainError("StepAConfig: epsilon must be > 0");
    if (!(cfg.box_upper > 0.0)) throw DomainError("StepAConfig: box_upper must be > 0");
    const double min_ratio = min_abs_ratio(inv);
    if (min_ratio == 0.0) throw TieError("Step A: Y_i == Y_n for some i <= n-2 (a_i = 0)");
    if (cfg.epsilon <= 0.1 && cfg.epsilon < min_ratio) return cfg.epsilon;
    if (!cfg.clamp_epsilon) {
        std::ostringstream msg;
        msg << "Step A: epsilon = " << cfg.epsilon << " violates epsilon <= 0.1 and epsilon < min|a_i| = "
            << min_ratio;
        throw DomainError(msg.str());
    }
    return std::min({cfg.epsilon, 0.1, 0.5 * min_ratio});
}

namespace detail {

inline constexpr std::uint64_t kStepAShiftTag = 0x5348494654ULL;      // "SHIFT"
inline constexpr std::uint64_t kStepAMultiplierTag = 0x4D554C54ULL;  // "MULT"

// Sampled epsilon-perturbations stay this fraction inside the slack so the
// proximity predicate survives floating-point rounding of U.
inline constexpr double kEpsilonGuard = 1.0 - 1e-7;

/// Step A.1 for vector j: fills v and returns the A.2.2 multiplier in (0, box].
inline double generate_raw_vector(const MaximalInvariant& inv, double eps, double box, RngSeed seed,
                                  std::span<double> v) {
    Rng rng(seed);
    const std::size_t n = v.size();
    // A.1.2: last two coordinates in [0, box] with v_{n-1} - v_n of the sign of y_{n-1} - y_n
    double hi, lo;
    do {
        hi = rng.uniform(0.0, box);
        lo = rng.uniform(0.0, box);
    } while (hi == lo);
    if ((hi - lo > 0.0) != (inv.sign() > 0.0)) std::swap(hi, lo);
    v[n - 2] = hi;
    v[n - 1] = lo;
    const double gap = hi - lo;
    // A.1.3: v_i uniform on the interval between v_n + gap (a_i - eps) and v_n + gap (a_i + eps)
    const double slack = eps * kEpsilonGuard;
    const auto ratios = inv.ratios();
    for (std::size_t i = 0; i + 2 < n; ++i) v[i] = lo + gap * (ratios[i] + rng.uniform(-slack, slack));
    return box * rng.uniform_pos();
}

struct RawVectorSummary {
    double mean;
    double mean_abs_dev;
    double centered_ss;
    double min;
    double max;
    double multiplier;
};

inline RawVectorSummary summarize(std::span<const double> v, double multiplier) noexcept {
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    double lo = v[0];
    double hi = v[0];
    for (double x : v) {
        sum += x;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    const double mean = sum / n;
    double abs_dev = 0.0;
    double ss = 0.0;
    for (double x : v) {
        const double d = x - mean;
        abs_dev += std::abs(d);
        ss += d * d;
    }
    return {mean, abs_dev / n, ss, lo, hi, multiplier};
}

inline RngSeed vector_seed(RngSeed seed, std::size_t j) noexcept { return derive_seed(seed, {j}); }

/// A.2.1 common location shift given the global minimum coordinate.
inline double step_a_shift(double global_min, RngSeed seed) {
    if (!(global_min < 0.0)) return 0.0;
    Rng rng(derive_seed(seed, {kStepAShiftTag}));
    return rng.uniform(-global_min, 1.0 - global_min);
}

/// A.2.2 multiplier for vector j given its own draw.
inline double step_a_multiplier(const StepAConfig& cfg, double own_draw) {
    if (cfg.multiplier == MultiplierMode::PerVector) return own_draw;
    Rng rng(derive_seed(cfg.seed, {kStepAMultiplierTag}));
    return cfg.box_upper * rng.uniform_pos();
}

template <class Fn>
void parallel_chunks(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::jthread> workers;
    const std::size_t chunk = (count + jobs - 1) / jobs;
    for (std::size_t begin = 0; begin < count; begin += chunk)
        workers.emplace_back([&fn, begin, end = std::min(count, begin + chunk)] { fn(begin, end); });
}

} // namespace detail

/// The set S of Step A: `count_for(n)` vectors in [0, box_upper]^n whose
/// invariant is within epsilon of U(sample). Vector j depends only on
/// (seed, j) and the shared shift, so output is independent of `jobs`.
inline std::vector<std::vector<double>> step_a_sample(const Sample& s, const StepAConfig& cfg) {
    const auto inv = maximal_invariant(s);
    const double eps = resolve_epsilon(cfg, inv);
    const std::size_t n = s.size();
    const std::size_t count = cfg.count_for(n);

    std::vector<std::vector<double>> raw(count, std::vector<double>(n));
    std::vector<double> multipliers(count);
    detail::parallel_chunks(count, cfg.jobs, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j)
            multipliers[j] = detail::generate_raw_vector(inv, eps, cfg.box_upper, detail::vector_seed(cfg.seed, j), raw[j]);
    });
    double global_min = std::numeric_limits<double>::infinity();
    for (const auto& v : raw) global_min = std::min(global_min, *std::min_element(v.begin(), v.end()));
    const double shift = detail::step_a_shift(global_min, cfg.seed);
    for (std::size_t j = 0; j < count; ++j) {
        auto& v = raw[j];
        for (double& x : v) x += shift;
        const double scale = detail::step_a_multiplier(cfg, multipliers[j]) / *std::max_element(v.begin(), v.end());
        for (double& x : v) x *= scale;
    }
    return raw;
}

struct MreLocationResult {
    double estimate = 0.0;    ///< D(y) = T0*(y) - C(y) T1*(y)
    double ratio = 0.0;       ///< C(y), the approximation of rho(U(y))
    double epsilon_used = 0.0;
    std::size_t vectors = 0;
};

/// Streaming evaluation of C(y) and D(y): each raw vector is reduced to its
/// moments, which determine f and g of the shifted and rescaled vector, so
/// memory stays O(count) rather than O(count * n).
inline MreLocationResult mre_location_detail(const Sample& s, const StepAConfig& cfg) {
    const auto inv = maximal_invariant(s);
    const double eps = resolve_epsilon(cfg, inv);
    const std::size_t n = s.size();
    const double nd = static_cast<double>(n);
    const std::size_t count = cfg.count_for(n);

    std::vector<detail::RawVectorSummary> summaries(count);
    detail::parallel_chunks(count, cfg.jobs, [&](std::size_t begin, std::size_t end) {
        std::vector<double> buffer(n);
        for (std::size_t j = begin; j < end; ++j) {
            const double r =
                detail::generate_raw_vector(inv, eps, cfg.box_upper, detail::vector_seed(cfg.seed, j), buffer);
            summaries[j] = detail::summarize(buffer, r);
        }
    });
    double global_min = std::numeric_limits<double>::infinity();
    for (const auto& sm : summaries) global_min = std::min(global_min, sm.min);
    const double shift = detail::step_a_shift(global_min, cfg.seed);

    std::vector<IntegrandLogs> terms(count);
    for (std::size_t j = 0; j < count; ++j) {
        const auto& sm = summaries[j];
        const double mean_u = sm.mean + shift;
        const double scale = detail::step_a_multiplier(cfg, sm.multiplier) / (sm.max + shift);
        const double mean_w = scale * mean_u;
        const double sum_sq_w = scale * scale * (sm.centered_ss + nd * mean_u * mean_u);
        terms[j] = integrand_logs_from_moments(mean_w, scale * sm.mean_abs_dev, sum_sq_w);
    }
    const double c = log_sum_ratio(terms);
    return {s.mean() - c * s.mean_abs_dev(), c, eps, count};
}

inline double mre_location_approx(const Sample& s, const StepAConfig& cfg) {
    return mre_location_detail(s, cfg).estimate;
}

} // namespace hnequiv
