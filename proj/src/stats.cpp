#include "ddosim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ddosim {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Continued fraction for the regularized incomplete beta function,
// evaluated with the modified Lentz scheme.
double betacf(double a, double b, double x) {
    const double fpmin = 1e-300;
    const double eps = 3e-16;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * betacf(a, b, x) / a;
    }
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

double variance_unbiased(std::span<const double> values, double mean) {
    long double acc = 0.0L;
    for (double v : values) {
        const long double d = static_cast<long double>(v) - mean;
        acc += d * d;
    }
    return static_cast<double>(acc / (values.size() - 1));
}

}  // namespace

double sample_mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("sample_mean: empty sample");
    long double acc = 0.0L;
    for (double v : values) acc += v;
    return static_cast<double>(acc / values.size());
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("sample_std: insufficient sample");
    return std::sqrt(variance_unbiased(values, sample_mean(values)));
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0, 1)");
    }
    // Bisection narrows the bracket, Newton finishes it off.
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 24; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    double z = 0.5 * (lo + hi);
    for (int i = 0; i < 32; ++i) {
        const double err = normal_cdf(z) - p;
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
        if (pdf <= 0.0) break;
        const double step = err / pdf;
        z -= step;
        if (std::fabs(step) < 1e-14 * std::max(1.0, std::fabs(z))) break;
    }
    return z;
}

double student_t_cdf(double t, double dof) {
    if (dof <= 0.0) throw std::domain_error("student_t_cdf: dof must be positive");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = dof / (dof + t * t);
    const double half_tail = 0.5 * ibeta(0.5 * dof, 0.5, x);
    return t >= 0.0 ? 1.0 - half_tail : half_tail;
}

double f_cdf(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return ibeta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

double kolmogorov_tail(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.18) {
        // Dual theta-series form: converges fast for small arguments where
        // the alternating series does not.
        const double v = M_PI * M_PI / (8.0 * x * x);
        double cdf = 0.0;
        for (int k = 1; k <= 5; k += 2) cdf += std::exp(-static_cast<double>(k) * k * v);
        cdf *= std::sqrt(2.0 * M_PI) / x;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double tail = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * static_cast<double>(k) * k * x * x);
        tail += (k % 2 == 1) ? term : -term;
        if (term < 1e-16 * std::max(tail, 1e-16)) break;
    }
    return std::clamp(tail, 0.0, 1.0);
}

TestResult ks_normality_test(std::span<const double> values, double alpha) {
    if (values.size() < 5) throw std::invalid_argument("ks_normality_test: need n >= 5");
    const double mean = sample_mean(values);
    const double sd = sample_std(values);
    if (sd <= 0.0) throw std::domain_error("ks_normality_test: degenerate sample");

    std::vector<double> z(values.begin(), values.end());
    for (double& v : z) v = (v - mean) / sd;
    std::sort(z.begin(), z.end());

    const double n = static_cast<double>(z.size());
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double cdf = normal_cdf(z[i]);
        const double step_hi = static_cast<double>(i + 1) / n - cdf;
        const double step_lo = cdf - static_cast<double>(i) / n;
        d = std::max({d, step_hi, step_lo});
    }

    TestResult r;
    r.statistic = d;
    r.p_value = kolmogorov_tail(std::sqrt(n) * d);
    r.alpha = alpha;
    r.reject_null = *r.p_value < alpha;
    return r;
}

double upper_confidence_bound(std::span<const double> values, double alpha) {
    const double mean = sample_mean(values);
    const double sd = sample_std(values);
    return mean + normal_quantile(1.0 - alpha) * sd / std::sqrt(static_cast<double>(values.size()));
}

double welch_t(std::span<const double> s1, std::span<const double> s2) {
    if (s1.size() < 2 || s2.size() < 2) throw std::invalid_argument("welch_t: insufficient sample");
    const double m1 = sample_mean(s1);
    const double m2 = sample_mean(s2);
    const double v1 = variance_unbiased(s1, m1);
    const double v2 = variance_unbiased(s2, m2);
    const double spread = v1 / s1.size() + v2 / s2.size();
    if (spread <= 0.0) throw std::domain_error("welch_t: zero pooled spread");
    return (m1 - m2) / std::sqrt(spread);
}

double pooled_variance(std::span<const double> s1, std::span<const double> s2) {
    const std::size_t n1 = s1.size();
    const std::size_t n2 = s2.size();
    if (n1 + n2 < 3 || n1 < 1 || n2 < 1) {
        throw std::invalid_argument("pooled_variance: insufficient degrees of freedom");
    }
    const double ss1 = n1 > 1 ? (n1 - 1) * variance_unbiased(s1, sample_mean(s1)) : 0.0;
    const double ss2 = n2 > 1 ? (n2 - 1) * variance_unbiased(s2, sample_mean(s2)) : 0.0;
    return (ss1 + ss2) / static_cast<double>(n1 + n2 - 2);
}

TestResult pooled_t(std::span<const double> s1, std::span<const double> s2, double alpha) {
    const double sp2 = pooled_variance(s1, s2);
    const double m1 = sample_mean(s1);
    const double m2 = sample_mean(s2);
    const double n1 = static_cast<double>(s1.size());
    const double n2 = static_cast<double>(s2.size());
    const double dof = n1 + n2 - 2.0;

    TestResult r;
    r.alpha = alpha;
    const double denom = std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2));
    if (denom == 0.0) {
        // Two constant samples: either identical (no evidence) or trivially apart.
        r.statistic = m1 == m2 ? 0.0
                               : std::copysign(std::numeric_limits<double>::infinity(), m1 - m2);
    } else {
        r.statistic = (m1 - m2) / denom;
    }
    r.p_value = 2.0 * (1.0 - student_t_cdf(std::fabs(r.statistic), dof));
    r.reject_null = *r.p_value < alpha;
    return r;
}

TestResult levene_test(std::span<const double> s1, std::span<const double> s2, double alpha,
                       LeveneCenter center) {
    if (s1.size() < 3 || s2.size() < 3) {
        throw std::invalid_argument("levene_test: each group needs n >= 3");
    }
    auto group_center = [center](std::span<const double> s) {
        if (center == LeveneCenter::mean) return sample_mean(s);
        std::vector<double> sorted(s.begin(), s.end());
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    };
    auto deviations = [](std::span<const double> s, double c) {
        std::vector<double> z(s.begin(), s.end());
        for (double& v : z) v = std::fabs(v - c);
        return z;
    };

    const std::vector<double> z1 = deviations(s1, group_center(s1));
    const std::vector<double> z2 = deviations(s2, group_center(s2));
    const bool all_zero = std::all_of(z1.begin(), z1.end(), [](double v) { return v == 0.0; }) &&
                          std::all_of(z2.begin(), z2.end(), [](double v) { return v == 0.0; });
    if (all_zero) throw std::domain_error("levene_test: degenerate groups");

    const double n1 = static_cast<double>(z1.size());
    const double n2 = static_cast<double>(z2.size());
    const double zb1 = sample_mean(z1);
    const double zb2 = sample_mean(z2);
    const double zb = (n1 * zb1 + n2 * zb2) / (n1 + n2);

    const double between = n1 * (zb1 - zb) * (zb1 - zb) + n2 * (zb2 - zb) * (zb2 - zb);
    long double within_acc = 0.0L;
    for (double v : z1) within_acc += (v - zb1) * (long double)(v - zb1);
    for (double v : z2) within_acc += (v - zb2) * (long double)(v - zb2);
    const double within = static_cast<double>(within_acc);
    const double dof2 = n1 + n2 - 2.0;

    TestResult r;
    r.alpha = alpha;
    if (between == 0.0) {
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.reject_null = false;
        return r;
    }
    if (within == 0.0) {
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        r.reject_null = true;
        return r;
    }
    r.statistic = dof2 * between / within;
    r.p_value = 1.0 - f_cdf(r.statistic, 1.0, dof2);
    r.reject_null = *r.p_value < alpha;
    return r;
}

}  // namespace ddosim
