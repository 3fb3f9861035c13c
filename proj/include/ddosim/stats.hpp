#pragma once

#include <optional>
#include <span>

namespace ddosim {

/// Outcome of a hypothesis test. p_value is absent when the decision was
/// made against a critical value rather than a tail probability.
struct TestResult {
    double statistic = 0.0;
    std::optional<double> p_value;
    bool reject_null = false;
    double alpha = 0.05;
};

/// Center used for the deviations in Levene's test.
enum class LeveneCenter { mean, median };

// Basic sample statistics. Throws std::invalid_argument on samples that are
// too small ("empty sample" / "insufficient sample").
double sample_mean(std::span<const double> values);
double sample_std(std::span<const double> values);

/// Standard normal CDF.
double normal_cdf(double z);

/// Inverse of the standard normal CDF, |error| well below 1e-6.
/// Throws std::domain_error unless 0 < p < 1.
double normal_quantile(double p);

/// CDF of Student's t distribution with dof degrees of freedom.
double student_t_cdf(double t, double dof);

/// CDF of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double x, double d1, double d2);

/// Asymptotic Kolmogorov tail probability P(sup-deviation * sqrt(n) > x).
double kolmogorov_tail(double x);

/// One-sample normality test: largest deviation between the empirical CDF of
/// the standardized sample and the standard normal CDF, evaluated at both
/// limits of every ECDF step. Requires n >= 5 and a non-degenerate sample.
TestResult ks_normality_test(std::span<const double> values, double alpha);

/// One-sided upper confidence bound mean + z_{1-alpha} * sd / sqrt(n).
/// This is the MPAR threshold separating normal from attack arrival rates.
double upper_confidence_bound(std::span<const double> values, double alpha);

/// Two-sample t statistic with unpooled variances.
double welch_t(std::span<const double> s1, std::span<const double> s2);

/// Weighted variance estimate ((n1-1)v1 + (n2-1)v2) / (n1+n2-2).
double pooled_variance(std::span<const double> s1, std::span<const double> s2);

/// Two-sample t test on the pooled variance with n1+n2-2 degrees of freedom,
/// two-sided decision at alpha.
TestResult pooled_t(std::span<const double> s1, std::span<const double> s2, double alpha);

/// Two-group Levene test for equal variances: one-way F statistic over
/// absolute deviations from the group centers.
TestResult levene_test(std::span<const double> s1, std::span<const double> s2, double alpha,
                       LeveneCenter center = LeveneCenter::mean);

}  // namespace ddosim
