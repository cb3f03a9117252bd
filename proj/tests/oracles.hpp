#pragma once

// Independent reference computations for the statistics and metrics tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "evrender/metrics.hpp"

namespace evtest {

struct TwoPass {
    double mean = 0.0;
    double variance = 0.0;
};

inline TwoPass two_pass(std::span<const double> v) {
    TwoPass r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    for (double x : v) r.variance += (x - r.mean) * (x - r.mean);
    r.variance = v.size() > 1 ? r.variance / static_cast<double>(v.size() - 1) : 0.0;
    return r;
}

inline double relative_error(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return got == want ? 0.0 : std::abs(got - want) / scale;
}

/// Student t density.
inline double t_density(double x, double nu) {
    const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI);
    return std::exp(log_c - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

/// Lower-tail CDF by composite Simpson integration of the density over
/// [0, |t|], using the symmetry about 0.
inline double t_cdf_by_quadrature(double t, double nu) {
    const double a = std::abs(t);
    if (a == 0.0) return 0.5;
    int n = static_cast<int>(std::ceil(a / 1e-3));
    if (n % 2 == 1) ++n;
    const double h = a / n;
    double sum = t_density(0.0, nu) + t_density(a, nu);
    for (int i = 1; i < n; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * t_density(i * h, nu);
    const double half = sum * h / 3.0;
    return t > 0.0 ? 0.5 + half : 0.5 - half;
}

/// O(n^2) nearest same-polarity squared distance, in the expression order
/// dx*dx + dy*dy + dz*dz.
inline double brute_nearest_squared(const evrender::SignedPoint& p, const evrender::SignedPointCloud& cloud,
                                    bool normalized, const evrender::SignedPointCloud& from) {
    double best = std::numeric_limits<double>::infinity();
    for (const evrender::SignedPoint& q : cloud.points) {
        if (q.polarity != p.polarity) continue;
        double dx, dy, dz;
        if (normalized) {
            dx = q.x / cloud.width - p.x / from.width;
            dy = q.y / cloud.height - p.y / from.height;
            dz = q.t / cloud.frames - p.t / from.frames;
        } else {
            dx = q.x - p.x;
            dy = q.y - p.y;
            dz = q.t - p.t;
        }
        best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    return best;
}

inline double brute_f1(const evrender::SignedPointCloud& a, const evrender::SignedPointCloud& b, double tau) {
    if (a.points.empty() && b.points.empty()) return 1.0;
    if (a.points.empty() || b.points.empty()) return 0.0;
    const auto fraction = [&](const evrender::SignedPointCloud& from, const evrender::SignedPointCloud& to) {
        std::size_t hit = 0;
        for (const auto& p : from.points) hit += std::sqrt(brute_nearest_squared(p, to, false, from)) <= tau;
        return static_cast<double>(hit) / static_cast<double>(from.points.size());
    };
    const double precision = fraction(a, b);
    const double recall = fraction(b, a);
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

inline double brute_pscd(const evrender::SignedPointCloud& a, const evrender::SignedPointCloud& b) {
    if (a.points.empty() && b.points.empty()) return 0.0;
    if (a.points.empty() || b.points.empty()) return std::sqrt(3.0);
    const auto mean = [&](const evrender::SignedPointCloud& from, const evrender::SignedPointCloud& to) {
        double sum = 0.0;
        for (const auto& p : from.points) {
            const double d2 = brute_nearest_squared(p, to, true, from);
            sum += std::isinf(d2) ? std::sqrt(3.0) : std::sqrt(d2);
        }
        return sum / static_cast<double>(from.points.size());
    };
    return 0.5 * (mean(a, b) + mean(b, a));
}

}  // namespace evtest
