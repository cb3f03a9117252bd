#pragma once

#include <cstdint>
#include <span>

namespace evrender {

/// Running count, mean and sum of squared deviations of log-luminance
/// samples (Welford). Variance is the unbiased n-1 form.
class LogLumStats {
public:
    LogLumStats() = default;

    /// Rebuilds an accumulator from summary values.
    static LogLumStats from_moments(std::uint64_t count, double mean, double variance);

    void add(double value) {
        ++count_;
        const double delta = value - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (value - mean_);
    }

    /// Chan et al. pairwise combination.
    void merge(const LogLumStats& other);

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double m2() const { return m2_; }
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }

    bool operator==(const LogLumStats&) const = default;

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

LogLumStats accumulate(LogLumStats stats, std::span<const double> values);

/// (|mu_b - mu_a| - threshold) / sqrt((var_a + var_b) / n_b).
/// With zero pooled variance the result is +inf, -inf or 0 according to the
/// sign of the numerator. Throws std::invalid_argument if either side has
/// fewer than two samples.
double t_statistic(const LogLumStats& a, const LogLumStats& b, double threshold);

/// Lower-tail CDF of Student's t with `dof` degrees of freedom (dof > 0).
double student_t_cdf(double t, double dof);

enum class Decision { terminate, continue_sampling };

struct TestOutcome {
    double t = 0.0;
    double p = 0.0;    // lower-tail probability
    double dof = 0.0;
    Decision decision = Decision::continue_sampling;
};

/// Tests whether the log-luminance gap is significantly below the threshold.
/// dof = b.count() - 1; terminates iff p < alpha.
TestOutcome one_tailed_test(const LogLumStats& a, const LogLumStats& b, double threshold, double alpha);

}  // namespace evrender
