#pragma once

// Special functions: standard normal, log-gamma, regularized incomplete beta,
// Student-t tails, and the expected minimum of n half-normal variables.
// All routines are pure; tail quantities are available in log space.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hnequiv/errors.hpp"
#include "hnequiv/quadrature.hpp"

namespace hnequiv {

inline constexpr double kSqrt2OverPi = 0.797884560802865355879892119868763737; // sqrt(2/pi)
inline constexpr double kLogSqrt2Pi = 0.918938533204672741780329736405617639;  // log(sqrt(2 pi))
inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934381868;  // 1/sqrt(2 pi)

// ---------------------------------------------------------------------------
// Standard normal

inline double norm_pdf(double t) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

inline double log_norm_pdf(double t) noexcept { return -0.5 * t * t - kLogSqrt2Pi; }

/// Phi(t). Relative accuracy is that of erfc, including deep in the lower tail.
inline double norm_cdf(double t) noexcept { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

/// Mills ratio R(x) = (1 - Phi(x)) / phi(x) for x >= 0.
inline double mills_ratio(double x) {
    if (!(x >= 0.0)) throw DomainError("mills_ratio: x must be >= 0");
    if (x < 5.0) return norm_cdf(-x) / norm_pdf(x);
    if (std::isinf(x)) return 0.0;
    // R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 5000; ++k) {
        d = x + k * d;
        if (d == 0.0) d = tiny;
        c = x + k / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) return 1.0 / f;
    }
    throw ConvergenceError("mills_ratio: continued fraction did not converge");
}

/// log Phi(t), finite for every finite t.
inline double log_norm_cdf(double t) {
    if (t > 0.0) return std::log1p(-norm_cdf(-t));
    if (t > -5.0) return std::log(norm_cdf(t));
    return log_norm_pdf(t) + std::log(mills_ratio(-t));
}

/// Phi^{-1}(p): rational initial guess refined by Halley steps.
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        std::ostringstream msg;
        msg << "norm_quantile: p must lie in (0, 1), got " << p;
        throw DomainError(msg.str());
    }
    if (p > 0.5) return -norm_quantile(1.0 - p); // 1 - p is exact here

    static constexpr std::array<double, 6> a = {-3.969683028665376e+01, 2.209460984245205e+02,
                                                -2.759285104469687e+02, 1.383577518672690e+02,
                                                -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b = {-5.447609879822406e+01, 1.615858368580409e+02,
                                                -1.556989798598866e+02, 6.680131188771972e+01,
                                                -1.328068155288572e+01};
    static constexpr std::array<double, 6> c = {-7.784894002430293e-03, -3.223964580411365e-01,
                                                -2.400758277161838e+00, -2.549732539343734e+00,
                                                4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d = {7.784695709041462e-03, 3.224671290700398e-01,
                                                2.445134137142996e+00, 3.754408661907416e+00};
    double x;
    if (p < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    for (int iter = 0; iter < 4; ++iter) {
        // Halley step on Phi(x) - p, with the residual scaled by 1/phi(x)
        const double u = (norm_cdf(x) - p) * std::exp(0.5 * x * x + kLogSqrt2Pi);
        const double step = u / (1.0 + 0.5 * x * u);
        x -= step;
        if (std::abs(step) <= 1e-16 * std::abs(x)) break;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Gamma and beta

/// log Gamma(x) for x > 0: upward recurrence to x >= 15, then Stirling series.
inline double log_gamma(double x) {
    if (!(x > 0.0) || std::isinf(x)) {
        std::ostringstream msg;
        msg << "log_gamma: x must be positive and finite, got " << x;
        throw DomainError(msg.str());
    }
    if (x <= 20.0 && x == std::floor(x)) {
        // (x-1)! is exact in double up to 19!
        double fact = 1.0;
        for (double k = 2.0; k < x; k += 1.0) fact *= k;
        return std::log(fact);
    }
    double shift = 0.0;
    if (x < 15.0) {
        double prod = 1.0;
        while (x < 15.0) {
            prod *= x;
            x += 1.0;
        }
        shift = std::log(prod);
    }
    static constexpr std::array<double, 8> bernoulli_terms = {
        1.0 / 12.0,           -1.0 / 360.0, 1.0 / 1260.0,  -1.0 / 1680.0,
        1.0 / 1188.0,         -691.0 / 360360.0, 1.0 / 156.0, -3617.0 / 122400.0};
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = 0.0;
    double power = inv;
    for (double term : bernoulli_terms) {
        series += term * power;
        power *= inv2;
    }
    return (x - 0.5) * std::log(x) - x + kLogSqrt2Pi + series - shift;
}

inline double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

namespace detail {

// Continued fraction for I_x(a, b) (modified Lentz), converging for x < (a+1)/(a+b+2).
inline double incbeta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 100000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw ConvergenceError("incomplete beta: continued fraction did not converge");
}

} // namespace detail

/// log I_x(a, b), the regularized incomplete beta. `y` must equal 1 - x; passing
/// it separately keeps full precision when x is close to 1.
inline double log_incbeta(double a, double b, double x, double y) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("incbeta: shape parameters must be positive");
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw DomainError("incbeta: x must lie in [0, 1]");
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    if (y == 0.0) return 0.0;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double log_front = a * std::log(x) + b * std::log(y) - log_beta(a, b) - std::log(a);
        return log_front + std::log(detail::incbeta_cf(a, b, x));
    }
    const double log_front = b * std::log(y) + a * std::log(x) - log_beta(a, b) - std::log(b);
    const double complement = std::exp(log_front) * detail::incbeta_cf(b, a, y);
    return std::log1p(-complement);
}

inline double incbeta(double a, double b, double x) { return std::exp(log_incbeta(a, b, x, 1.0 - x)); }

// ---------------------------------------------------------------------------
// Student t

/// log P(T >= x) for T ~ t(dof).
inline double log_student_t_tail(double x, int dof) {
    if (dof < 1) {
        std::ostringstream msg;
        msg << "student_t_tail: dof must be >= 1, got " << dof;
        throw DomainError(msg.str());
    }
    if (std::isnan(x)) throw DomainError("student_t_tail: x is NaN");
    if (x == 0.0) return -std::numbers::ln2;
    const double nu = dof;
    if (x < 0.0) return std::log1p(-std::exp(log_student_t_tail(-x, dof)));
    if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
    // P(T >= x) = I_{nu/(nu+x^2)}(nu/2, 1/2) / 2, with 1 - nu/(nu+x^2) = x^2/(nu+x^2)
    double w, w_comp;
    if (x > 1e150) {
        w = nu / x / x;
        w_comp = 1.0;
    } else {
        const double denom = nu + x * x;
        w = nu / denom;
        w_comp = x * x / denom;
    }
    return -std::numbers::ln2 + log_incbeta(0.5 * nu, 0.5, w, w_comp);
}

/// P(T >= x) for T ~ t(dof).
inline double student_t_tail(double x, int dof) {
    if (x < 0.0) return 1.0 - std::exp(log_student_t_tail(-x, dof));
    return std::exp(log_student_t_tail(x, dof));
}

// ---------------------------------------------------------------------------
// c_n = E(min of n |N(0,1)|) = int_0^inf (2 - 2 Phi(t))^n dt

namespace detail {

inline double log_two_tail(double t) { return std::log(std::erfc(t / std::numbers::sqrt2)); }

} // namespace detail

/// Point T* beyond which (2 - 2 Phi(t))^n < abs_tol / (1 + t).
inline double half_min_truncation(int n, double abs_tol) {
    auto below = [n, abs_tol](double t) {
        return n * detail::log_two_tail(t) < std::log(abs_tol / (1.0 + t));
    };
    double hi = 0.25;
    while (!below(hi)) hi += 0.25;
    double lo = hi - 0.25;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (below(mid) ? hi : lo) = mid;
    }
    return hi;
}

inline double half_min_constant(int n, const QuadratureSpec& spec = {1e-14, 1e-13, 2000}) {
    if (n < 1) {
        std::ostringstream msg;
        msg << "half_min_constant: n must be >= 1, got " << n;
        throw DomainError(msg.str());
    }
    spec.validate();
    const double upper = half_min_truncation(n, spec.abs_tol);
    auto integrand = [n](double t) { return std::exp(n * detail::log_two_tail(t)); };
    return integrate(integrand, 0.0, upper, spec).value;
}

} // namespace hnequiv
