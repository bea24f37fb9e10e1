#pragma once

// The general half-normal law HN(xi, eta): xi + eta |Z| with Z ~ N(0, 1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "hnequiv/errors.hpp"
#include "hnequiv/rng.hpp"
#include "hnequiv/specfun.hpp"

namespace hnequiv {

struct HalfNormalParams {
    double xi = 0.0;  ///< location
    double eta = 1.0; ///< scale, > 0

    HalfNormalParams() = default;
    HalfNormalParams(double location, double scale) : xi(location), eta(scale) {
        if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(location)) {
            std::ostringstream msg;
            msg << "HalfNormalParams: need finite xi and eta > 0, got (" << location << ", " << scale << ")";
            throw DomainError(msg.str());
        }
    }
};

/// Observations with the summaries every estimator reads, computed once.
class Sample {
public:
    explicit Sample(std::vector<double> values) : values_(std::move(values)) {
        if (values_.size() < 2) throw DomainError("Sample: need at least 2 observations");
        const double n = static_cast<double>(values_.size());
        double sum = 0.0;
        min_ = values_.front();
        for (double v : values_) {
            if (!std::isfinite(v)) throw DomainError("Sample: non-finite observation");
            sum += v;
            min_ = std::min(min_, v);
        }
        mean_ = sum / n;
        double ss = 0.0;
        double abs_dev = 0.0;
        for (double v : values_) {
            const double dev = v - mean_;
            ss += dev * dev;
            abs_dev += std::abs(dev);
        }
        variance_ = ss / (n - 1.0);
        mean_abs_dev_ = abs_dev / n;
    }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double mean() const noexcept { return mean_; }
    double min() const noexcept { return min_; }
    /// S^2 with divisor n - 1.
    double variance() const noexcept { return variance_; }
    double stddev() const noexcept { return std::sqrt(variance_); }
    /// T1* = (1/n) sum |Y_i - mean|.
    double mean_abs_dev() const noexcept { return mean_abs_dev_; }

    /// a + b * y elementwise.
    Sample affine(double a, double b) const {
        std::vector<double> out(values_.size());
        std::transform(values_.begin(), values_.end(), out.begin(), [a, b](double v) { return a + b * v; });
        return Sample(std::move(out));
    }

private:
    std::vector<double> values_;
    double mean_ = 0.0;
    double min_ = 0.0;
    double variance_ = 0.0;
    double mean_abs_dev_ = 0.0;
};

inline double pdf(const HalfNormalParams& p, double y) noexcept {
    if (y < p.xi) return 0.0;
    const double z = (y - p.xi) / p.eta;
    return kSqrt2OverPi / p.eta * std::exp(-0.5 * z * z);
}

/// P(Y <= y) = 2 Phi((y - xi)/eta) - 1 on the support.
inline double cdf(const HalfNormalParams& p, double y) noexcept {
    if (y <= p.xi) return 0.0;
    return std::erf((y - p.xi) / p.eta / std::numbers::sqrt2);
}

struct MeanVar {
    double mean;
    double variance;
};

inline MeanVar mean_var(const HalfNormalParams& p) noexcept {
    return {p.xi + p.eta * kSqrt2OverPi, p.eta * p.eta * (std::numbers::pi - 2.0) / std::numbers::pi};
}

/// n i.i.d. draws xi + eta |Z|. The |Z| stream depends only on the seed, so
/// sample(xi, eta) == xi + eta * sample(0, 1) elementwise.
inline Sample sample(const HalfNormalParams& p, std::size_t n, RngSeed seed) {
    if (n < 2) throw DomainError("sample: n must be >= 2");
    Rng rng(seed);
    std::vector<double> values(n);
    for (auto& v : values) v = p.xi + p.eta * std::abs(rng.normal());
    return Sample(std::move(values));
}

/// Standard bivariate normal pairs with correlation `cov` (unit variances),
/// by Cholesky: X = Z1, Y = cov Z1 + sqrt(1 - cov^2) Z2.
inline std::vector<std::pair<double, double>> sample_bivariate_normal(double cov, std::size_t n, RngSeed seed) {
    if (!(std::abs(cov) < 1.0)) throw DomainError("sample_bivariate_normal: need |cov| < 1");
    Rng rng(seed);
    const double tail = std::sqrt(1.0 - cov * cov);
    std::vector<std::pair<double, double>> out(n);
    for (auto& [x, y] : out) {
        x = rng.normal();
        y = cov * x + tail * rng.normal();
    }
    return out;
}

} // namespace hnequiv
