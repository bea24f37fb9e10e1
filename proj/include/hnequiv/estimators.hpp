#pragma once

// Closed-form estimators of the location xi and scale eta of HN(xi, eta).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string_view>

#include "hnequiv/dist.hpp"
#include "hnequiv/errors.hpp"
#include "hnequiv/quadrature.hpp"
#include "hnequiv/specfun.hpp"

namespace hnequiv {

enum class Method { Unbiased, MLE, MRE, PitmanKnownScale, MREKnownLocation, UMVUKnownLocation };

inline std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::Unbiased: return "unbiased";
    case Method::MLE: return "mle";
    case Method::MRE: return "mre";
    case Method::PitmanKnownScale: return "pitman_known_scale";
    case Method::MREKnownLocation: return "mre_known_location";
    case Method::UMVUKnownLocation: return "umvu_known_location";
    }
    return "unknown";
}

struct LocationScaleEstimate {
    std::optional<double> xi_hat; ///< empty when the method estimates only the scale
    double eta_hat = 0.0;
    Method method = Method::Unbiased;
};

/// xi~ = (sqrt(2/pi) Y_(1) - c_n Ybar) / (sqrt(2/pi) - c_n),
/// eta~ = (Ybar - Y_(1)) / (sqrt(2/pi) - c_n).
/// `c_n` is half_min_constant(sample.size()), computed once per n by the caller.
inline LocationScaleEstimate unbiased(const Sample& s, double c_n) {
    const double denom = kSqrt2OverPi - c_n;
    if (!(denom > 0.0) || !(c_n > 0.0)) {
        std::ostringstream msg;
        msg << "unbiased: c_n = " << c_n << " must lie in (0, sqrt(2/pi))";
        throw DegenerateSampleError(msg.str());
    }
    const double xi = (kSqrt2OverPi * s.min() - c_n * s.mean()) / denom;
    const double eta = (s.mean() - s.min()) / denom;
    return {xi, std::max(eta, 0.0), Method::Unbiased};
}

/// xi^ = Y_(1), eta^ = sqrt((1/n) sum (Y_i - Y_(1))^2).
inline LocationScaleEstimate mle(const Sample& s) {
    // sum (y - min)^2 = (n - 1) S^2 + n (Ybar - min)^2
    const double n = static_cast<double>(s.size());
    const double gap = s.mean() - s.min();
    const double ms = ((n - 1.0) * s.variance() + n * gap * gap) / n;
    return {s.min(), std::sqrt(ms), Method::MLE};
}

/// pi S^2 / (pi - 2), unbiased for eta^2.
inline double unbiased_eta_squared(const Sample& s) noexcept {
    return std::numbers::pi * s.variance() / (std::numbers::pi - 2.0);
}

namespace detail {

inline void require_spread(const Sample& s, std::string_view who) {
    if (s.size() < 3) {
        std::ostringstream msg;
        msg << who << ": need n >= 3, got " << s.size();
        throw DomainError(msg.str());
    }
    if (!(s.variance() > 0.0)) {
        std::ostringstream msg;
        msg << who << ": sample standard deviation is zero";
        throw DegenerateSampleError(msg.str());
    }
}

} // namespace detail

/// MRE scale estimator under loss (x - eta)^2 / eta^2:
///   sqrt((n-1)/2) G((n+1)/2)/G((n+2)/2) * t_{n+1}[a1, inf) / t_{n+2}[a2, inf) * S
/// with a_k = sqrt(n k / (n-1)) (Ybar - Y_(1)) / S. Gamma ratio and tails in log space.
inline LocationScaleEstimate mre_scale(const Sample& s) {
    detail::require_spread(s, "mre_scale");
    const int n = static_cast<int>(s.size());
    const double nd = n;
    const double sd = s.stddev();
    const double spread = (s.mean() - s.min()) / sd;
    const double a1 = std::sqrt(nd * (nd + 1.0) / (nd - 1.0)) * spread;
    const double a2 = std::sqrt(nd * (nd + 2.0) / (nd - 1.0)) * spread;
    const double log_eta = 0.5 * std::log(0.5 * (nd - 1.0)) + log_gamma(0.5 * (nd + 1.0)) -
                           log_gamma(0.5 * (nd + 2.0)) + log_student_t_tail(a1, n + 1) -
                           log_student_t_tail(a2, n + 2) + std::log(sd);
    return {std::nullopt, std::exp(log_eta), Method::MRE};
}

/// The same estimator as the ratio I_n / I_{n+1} of
///   I_k = int_0^inf v^k f'(v y') dv
///       ∝ int_0^inf v^k exp(-(n-1) S^2 v^2 / 2) Phi(-sqrt(n) (Ybar - Y_(1)) v) dv,
/// evaluated by adaptive quadrature in log space. Independent of the t-tail route.
inline double mre_scale_by_integration(const Sample& s, const QuadratureSpec& spec = {1e-300, 1e-12, 4000}) {
    detail::require_spread(s, "mre_scale_by_integration");
    spec.validate();
    const double n = static_cast<double>(s.size());
    const double quad = (n - 1.0) * s.variance();
    const double slope = std::sqrt(n) * (s.mean() - s.min());

    auto log_integrand = [&](double k, double v) {
        if (v <= 0.0) return -std::numeric_limits<double>::infinity();
        return k * std::log(v) - 0.5 * quad * v * v + log_norm_cdf(-slope * v);
    };

    // log_integrand is concave in v; bracket its mode by golden section.
    const double k_lo = n;
    double lo = 0.0;
    double hi = std::sqrt((k_lo + 1.0) / quad) * 4.0;
    while (log_integrand(k_lo, hi) > log_integrand(k_lo, 0.5 * hi)) hi *= 2.0;
    constexpr double golden = 0.6180339887498949;
    double x1 = hi - golden * (hi - lo);
    double x2 = lo + golden * (hi - lo);
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        if (log_integrand(k_lo, x1) < log_integrand(k_lo, x2)) {
            lo = x1;
            x1 = x2;
            x2 = lo + golden * (hi - lo);
        } else {
            hi = x2;
            x2 = x1;
            x1 = hi - golden * (hi - lo);
        }
    }
    const double mode = 0.5 * (lo + hi);
    const double peak = log_integrand(k_lo, mode);

    // integration window: where the k = n+1 integrand is within e^-80 of the peak
    double right = mode;
    double step = mode;
    while (log_integrand(k_lo + 1.0, right) - peak > -80.0) right += step;
    double left = mode;
    while (left > 0.0 && log_integrand(k_lo, left) - peak > -80.0) left *= 0.5;

    auto ratio_part = [&](double k) {
        auto f = [&](double v) { return std::exp(log_integrand(k, v) - peak); };
        return integrate(f, left, mode, spec).value + integrate(f, mode, right, spec).value;
    };
    return ratio_part(n) / ratio_part(n + 1.0);
}

/// Pitman (MRE under squared error) location estimator with known scale eta0:
///   T1 = Ybar - eta0/sqrt(n) * phi(z) / Phi(z),  z = sqrt(n) (Y_(1) - Ybar) / eta0.
/// phi/Phi is evaluated as exp(log phi - log Phi), finite for any n.
inline double pitman_location_known_scale(const Sample& s, double eta0) {
    if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw DomainError("pitman_location_known_scale: eta0 must be > 0");
    const double root_n = std::sqrt(static_cast<double>(s.size()));
    const double z = root_n * (s.min() - s.mean()) / eta0;
    const double inverse_mills = std::exp(log_norm_pdf(z) - log_norm_cdf(z));
    return s.mean() - eta0 / root_n * inverse_mills;
}

/// Gamma((n+1)/2) / (sqrt(2) Gamma((n+2)/2)).
inline double mre_known_location_factor(int n) {
    if (n < 1) throw DomainError("mre_known_location_factor: n must be >= 1");
    return std::exp(log_gamma(0.5 * (n + 1.0)) - log_gamma(0.5 * (n + 2.0))) / std::numbers::sqrt2;
}

/// Gamma(n/2) / (sqrt(2) Gamma((n+1)/2)).
inline double umvu_known_location_factor(int n) {
    if (n < 1) throw DomainError("umvu_known_location_factor: n must be >= 1");
    return std::exp(log_gamma(0.5 * n) - log_gamma(0.5 * (n + 1.0))) / std::numbers::sqrt2;
}

namespace detail {

inline double root_sum_sq_above(const Sample& s, double xi0, std::string_view who) {
    double ss = 0.0;
    for (double v : s.values()) {
        if (v < xi0) {
            std::ostringstream msg;
            msg << who << ": observation " << v << " lies below the known location " << xi0;
            throw DomainError(msg.str());
        }
        ss += (v - xi0) * (v - xi0);
    }
    if (!(ss > 0.0)) {
        std::ostringstream msg;
        msg << who << ": every observation equals the known location";
        throw DegenerateSampleError(msg.str());
    }
    return std::sqrt(ss);
}

} // namespace detail

/// MRE scale estimator when xi = xi0 is known (loss (x - eta)^2 / eta^2).
inline double mre_scale_known_location(const Sample& s, double xi0) {
    const double root = detail::root_sum_sq_above(s, xi0, "mre_scale_known_location");
    return mre_known_location_factor(static_cast<int>(s.size())) * root;
}

/// UMVU scale estimator when xi = xi0 is known.
inline double umvu_scale_known_location(const Sample& s, double xi0) {
    const double root = detail::root_sum_sq_above(s, xi0, "umvu_scale_known_location");
    return umvu_known_location_factor(static_cast<int>(s.size())) * root;
}

} // namespace hnequiv
