#pragma once

// Globally adaptive 15-point Gauss-Kronrod integration (QUADPACK QAG scheme).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "hnequiv/errors.hpp"

namespace hnequiv {

struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_subdivisions = 2000;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions < 1)
            throw DomainError("QuadratureSpec: abs_tol, rel_tol must be > 0 and max_subdivisions >= 1");
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss 7-point weights at Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error;
};

template <class F>
Segment gauss_kronrod15(F& f, double a, double b) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::abs(half);

    std::array<double, 7> f1{}, f2{};
    const double fc = f(center);
    double res_gauss = fc * kGaussWeights[3];
    double res_kronrod = fc * kKronrodWeights[7];
    double res_abs = std::abs(res_kronrod);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double sum = f1[j] + f2[j];
        res_kronrod += kKronrodWeights[j] * sum;
        res_abs += kKronrodWeights[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) res_gauss += kGaussWeights[j / 2] * sum;
    }
    const double mean = 0.5 * res_kronrod;
    double res_asc = kKronrodWeights[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        res_asc += kKronrodWeights[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double value = res_kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    double err = std::abs((res_kronrod - res_gauss) * half);
    if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    if (res_abs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * res_abs, err);
    return {a, b, value, err};
}

} // namespace detail

/// Integral of f over the finite interval [a, b].
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    spec.validate();
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DomainError("integrate: bounds must be finite; use integrate_to_infinity");
    if (a == b) return {};

    std::vector<detail::Segment> segments{detail::gauss_kronrod15(f, a, b)};
    auto worse = [](const detail::Segment& l, const detail::Segment& r) { return l.error < r.error; };
    double total = segments.front().value;
    double total_err = segments.front().error;
    int splits = 0;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        if (splits >= spec.max_subdivisions) {
            std::ostringstream msg;
            msg << "integrate: tolerance not met on [" << a << ", " << b << "] after " << splits
                << " subdivisions (estimate " << total << ", error " << total_err << ")";
            throw ConvergenceError(msg.str());
        }
        std::pop_heap(segments.begin(), segments.end(), worse);
        const detail::Segment worst = segments.back();
        segments.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b)) {
            // interval at machine resolution; cannot refine further
            throw ConvergenceError("integrate: roundoff limit reached before tolerance");
        }
        const auto left = detail::gauss_kronrod15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod15(f, mid, worst.b);
        segments.push_back(left);
        std::push_heap(segments.begin(), segments.end(), worse);
        segments.push_back(right);
        std::push_heap(segments.begin(), segments.end(), worse);
        ++splits;

        // re-sum to avoid drift from incremental updates
        total = 0.0;
        total_err = 0.0;
        for (const auto& s : segments) {
            total += s.value;
            total_err += s.error;
        }
    }
    return {total, total_err, splits};
}

/// Integral of f over [a, +inf) via t = a + (1 - x) / x on x in (0, 1].
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, const QuadratureSpec& spec = {}) {
    auto mapped = [&f, a](double x) {
        const double t = a + (1.0 - x) / x;
        return f(t) / (x * x);
    };
    return integrate(mapped, 0.0, 1.0, spec);
}

} // namespace hnequiv
