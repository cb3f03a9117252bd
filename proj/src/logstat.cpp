#include "evrender/logstat.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace evrender {

LogLumStats LogLumStats::from_moments(std::uint64_t count, double mean, double variance) {
    LogLumStats s;
    s.count_ = count;
    s.mean_ = mean;
    s.m2_ = count > 1 ? variance * static_cast<double>(count - 1) : 0.0;
    return s;
}

void LogLumStats::merge(const LogLumStats& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    m2_ += other.m2_ + delta * delta * (na * nb / n);
    count_ += other.count_;
}

LogLumStats accumulate(LogLumStats stats, std::span<const double> values) {
    for (double v : values) stats.add(v);
    return stats;
}

double t_statistic(const LogLumStats& a, const LogLumStats& b, double threshold) {
    if (a.count() < 2 || b.count() < 2) {
        throw std::invalid_argument("t_statistic: both sides need at least two samples");
    }
    const double gap = std::abs(b.mean() - a.mean()) - threshold;
    const double pooled = a.variance() + b.variance();
    if (pooled == 0.0) {
        if (gap > 0.0) return std::numeric_limits<double>::infinity();
        if (gap < 0.0) return -std::numeric_limits<double>::infinity();
        return 0.0;
    }
    return gap / std::sqrt(pooled / static_cast<double>(b.count()));
}

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw std::invalid_argument("student_t_cdf: degrees of freedom must be > 0");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
    if (t == 0.0) return 0.5;
    // P(|T| > |t|) = I_x(dof/2, 1/2) with x = dof / (dof + t^2).
    const double t2 = t * t;
    double tail;
    if (t2 < dof) {
        // Complement form keeps precision when x is close to one.
        tail = boost::math::ibetac(0.5, 0.5 * dof, t2 / (dof + t2));
    } else {
        tail = boost::math::ibeta(0.5 * dof, 0.5, dof / (dof + t2));
    }
    return t > 0.0 ? 1.0 - 0.5 * tail : 0.5 * tail;
}

TestOutcome one_tailed_test(const LogLumStats& a, const LogLumStats& b, double threshold, double alpha) {
    TestOutcome out;
    out.t = t_statistic(a, b, threshold);
    out.dof = static_cast<double>(b.count() - 1);
    out.p = student_t_cdf(out.t, out.dof);
    out.decision = out.p < alpha ? Decision::terminate : Decision::continue_sampling;
    return out;
}

}  // namespace evrender
