#include "outage/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace outage {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailEps = 1e-17;
constexpr double kLogTailEps = -39.14394658089878;  // ln(1e-17)
constexpr double kBesselSeriesLimit = 20.0;

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

inline double log_add_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// ln(n!) for small n, tabulated once.
const std::array<double, 256>& log_factorial_table() {
    static const std::array<double, 256> table = [] {
        std::array<double, 256> t{};
        t[0] = 0.0;
        for (std::size_t n = 1; n < t.size(); ++n) t[n] = t[n - 1] + std::log(static_cast<double>(n));
        return t;
    }();
    return table;
}

// ln Gamma(a) with a fast path for positive integers.
inline double log_gamma_fast(double a) {
    if (a >= 1.0 && a < 256.0 && a == std::floor(a)) return log_factorial_table()[static_cast<std::size_t>(a) - 1];
    return log_gamma(a);
}

// lnGamma(n+1) - (n+1/2) ln n + n - ln sqrt(2 pi), n > 0.
double stirling_error(double n) {
    if (n > 15.0) {
        constexpr double s0 = 1.0 / 12.0, s1 = 1.0 / 360.0, s2 = 1.0 / 1260.0, s3 = 1.0 / 1680.0, s4 = 1.0 / 1188.0;
        const double nn = n * n;
        return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
    }
    return log_gamma_fast(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * std::log(2.0 * std::numbers::pi);
}

// x ln(x/np) + np - x without cancellation when x ~ np.
double deviance_term(double x, double np) {
    if (std::fabs(x - np) < 0.1 * (x + np)) {
        const double v = (x - np) / (x + np);
        double s = (x - np) * v;
        double ej = 2.0 * x * v;
        const double v2 = v * v;
        for (int j = 1; j < 1000; ++j) {
            ej *= v2;
            const double s1 = s + ej / (2 * j + 1);
            if (s1 == s) return s1;
            s = s1;
        }
        return s;
    }
    return x * std::log(x / np) + np - x;
}

// ln(x^a e^{-x} / Gamma(a + 1)) for a >= 0, x > 0, accurate when a and x are
// both large (the naive form loses ~|a ln x| * eps).
double log_poisson_term(double a, double x) {
    if (a == 0.0) return -x;
    if (a < 10.0) return a * std::log(x) - x - log_gamma_fast(a + 1.0);
    return -0.5 * std::log(2.0 * std::numbers::pi * a) - stirling_error(a) - deviance_term(a, x);
}

// ln Q(a, x) for x >= a + 1 by Lentz's continued fraction.
double log_upper_gamma_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return log_poisson_term(a, x) + std::log(a) + std::log(h);
}

// ln P(a, x) for x < a + 1 by the power series.
double log_lower_gamma_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < 10000000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (del < sum * kTailEps) break;
    }
    return std::log(sum) + log_poisson_term(a, x) + std::log(a);
}

double log_lower_gamma_unchecked(double a, double x) {
    if (x == 0.0) return -kInf;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return log_lower_gamma_series(a, x);
    return std::log1p(-std::exp(log_upper_gamma_cf(a, x)));
}

double log_upper_gamma_unchecked(double a, double x) {
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return -kInf;
    if (x < a + 1.0) return std::log1p(-std::exp(log_lower_gamma_series(a, x)));
    return log_upper_gamma_cf(a, x);
}

// Central chi-square law has no Poisson mixing.
inline double log_poisson_pmf(double h, double j) { return log_poisson_term(j, h); }

// Log-space Poisson-mixture sweep for ln F. Starts at the top index jhi and
// walks down; P(a-1, y) = P(a, y) + d_{a-1}(y), d_a = e^{-y} y^a / a!.
double ncx2_logcdf_logspace(double y, double h, double n0, double jhi, double log_w_hi) {
    const double a_hi = n0 + jhi;
    double lp = log_lower_gamma_unchecked(a_hi, y);
    double ld = log_poisson_term(a_hi - 1.0, y);
    double lw = log_w_hi;
    double lsum = lw + lp;
    const double ln_h = std::log(h);
    const double ln_y = std::log(y);
    for (double j = jhi; j >= 1.0; j -= 1.0) {
        lp = log_add_exp(lp, ld);
        ld += std::log(n0 + j - 1.0) - ln_y;
        lw += std::log(j) - ln_h;
        lsum = log_add_exp(lsum, lw + lp);
        const double jn = j - 1.0;
        if (jn < h) {
            if (jn == 0.0) break;
            // Remaining Poisson mass below jn, each term bounded by P <= 1.
            const double rem = lw + std::log(jn / h) - std::log1p(-(jn - 1.0) / h);
            if (rem < kLogTailEps + lsum) break;
        }
    }
    return lsum;
}

double ncx2_logcdf_impl(double x, int dof, double lambda) {
    if (x <= 0.0) return -kInf;
    if (std::isinf(x)) return 0.0;
    const double y = 0.5 * x;
    const double h = 0.5 * lambda;
    const double n0 = 0.5 * dof;
    if (h == 0.0) return log_lower_gamma_unchecked(n0, y);

    // Upper truncation: Poisson tail beyond jhi below kTailEps * w(j*).
    // Terms above j* have P <= P(j*), so the omitted part is relatively small.
    const double jstar = std::floor(h);
    double w = 1.0;
    double j = jstar;
    for (;;) {
        const double wn = w * h / (j + 1.0);
        if (j + 2.0 > h && wn / (1.0 - h / (j + 2.0)) < kTailEps) break;
        w = wn;
        j += 1.0;
    }
    const double jhi = j;
    const double log_w_star = log_poisson_pmf(h, jstar);

    const double a_hi = n0 + jhi;
    const double lp_hi = log_lower_gamma_unchecked(a_hi, y);
    const double ld_hi = log_poisson_term(a_hi - 1.0, y);
    if (ld_hi - lp_hi > 600.0 || !std::isfinite(lp_hi)) {
        return ncx2_logcdf_logspace(y, h, n0, jhi, log_w_star + std::log(w));
    }

    // Linear sweep in units of P(a_hi) and w(j*).
    double p = 1.0;
    double d = std::exp(ld_hi - lp_hi);
    double wr = w;
    double sum = wr * p;
    const double p_cap = std::exp(-lp_hi);  // P <= 1 in these units
    for (double jj = jhi; jj >= 1.0; jj -= 1.0) {
        p += d;
        d *= (n0 + jj - 1.0) / y;
        wr *= jj / h;
        sum += wr * p;
        if (p > 1e290 || d > 1e290 || wr < 1e-290) {
            return ncx2_logcdf_logspace(y, h, n0, jhi, log_w_star + std::log(w));
        }
        const double jn = jj - 1.0;
        if (jn < h) {
            if (jn == 0.0) break;
            const double rem = wr * (jn / h) / (1.0 - (jn - 1.0) / h);
            if (rem * p_cap < kTailEps * sum) break;
        }
    }
    return lp_hi + log_w_star + std::log(sum);
}

// Upper tail by an upward sweep: Q(a+1, y) = Q(a, y) + d_a(y).
double ncx2_logsf_impl(double x, int dof, double lambda) {
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return -kInf;
    const double y = 0.5 * x;
    const double h = 0.5 * lambda;
    const double n0 = 0.5 * dof;
    if (h == 0.0) return log_upper_gamma_unchecked(n0, y);

    const double jstar = std::floor(h);
    double w = 1.0;
    double j = jstar;
    while (j > 0.0) {
        const double wn = w * j / h;
        if (wn / (1.0 - (j - 1.0) / h) < kTailEps) break;
        w = wn;
        j -= 1.0;
    }
    const double jlo = j;
    const double ln_h = std::log(h);
    const double ln_y = std::log(y);
    double lq = log_upper_gamma_unchecked(n0 + jlo, y);
    double ld = log_poisson_term(n0 + jlo, y);
    double lw = log_poisson_pmf(h, jstar) + std::log(w);
    double lsum = lw + lq;
    for (double jj = jlo; jj < jlo + 1e7; jj += 1.0) {
        lq = log_add_exp(lq, ld);
        ld += ln_y - std::log(n0 + jj + 1.0);
        lw += ln_h - std::log(jj + 1.0);
        lsum = log_add_exp(lsum, lw + lq);
        const double jn = jj + 1.0;
        if (jn + 2.0 > h) {
            const double rem = lw + std::log(h / (jn + 1.0)) - std::log1p(-h / (jn + 2.0));
            if (rem < kLogTailEps + lsum) break;
        }
    }
    return lsum;
}

// Poisson mixture of central chi-square densities, summed outward from the
// largest term. The term ratio is log-concave in j, so each side stops once
// its geometric remainder is negligible.
double ncx2_logpdf_mixture(double x, int dof, double lambda) {
    const double y = 0.5 * x;
    const double h = 0.5 * lambda;
    const double n0 = 0.5 * dof;
    if (x == 0.0) return n0 == 1.0 ? -std::numbers::ln2 - h : -kInf;
    const double ln_y = std::log(y);
    const double ln_h = h > 0.0 ? std::log(h) : -kInf;
    auto log_term = [&](double j) {
        const double lw = h > 0.0 ? log_poisson_pmf(h, j) : (j == 0.0 ? 0.0 : -kInf);
        return lw - std::numbers::ln2 + log_poisson_term(n0 + j - 1.0, y);
    };
    if (h == 0.0) return log_term(0.0);

    const double disc = (n0 - 1.0) * (n0 - 1.0) + 4.0 * h * y;
    const double jpeak = std::max(0.0, std::round(0.5 * (-(n0 + 1.0) + std::sqrt(disc))));
    const double lpeak = log_term(jpeak);
    double lsum = lpeak;
    // Upward.
    double lt = lpeak;
    for (double j = jpeak; j < jpeak + 1e7; j += 1.0) {
        const double log_ratio = ln_h + ln_y - std::log(j + 1.0) - std::log(n0 + j);
        lt += log_ratio;
        lsum = log_add_exp(lsum, lt);
        if (log_ratio < 0.0 && lt - std::log1p(-std::exp(log_ratio)) < kLogTailEps + lsum) break;
    }
    // Downward.
    lt = lpeak;
    for (double j = jpeak; j >= 1.0; j -= 1.0) {
        const double log_ratio = std::log(j) + std::log(n0 + j - 1.0) - ln_h - ln_y;
        lt += log_ratio;
        lsum = log_add_exp(lsum, lt);
        if (log_ratio < 0.0 && lt - std::log1p(-std::exp(log_ratio)) < kLogTailEps + lsum) break;
    }
    return lsum;
}

double acklam_normal_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

Ncx2Params::Ncx2Params(int dof_, double noncentrality_) : dof(dof_), noncentrality(noncentrality_) {
    require(dof >= 2 && dof % 2 == 0, "ncx2: degrees of freedom must be an even integer >= 2");
    require(noncentrality >= 0.0 && std::isfinite(noncentrality), "ncx2: noncentrality must be finite and >= 0");
}

double log_gamma(double x) {
    require(x > 0.0, "log_gamma: argument must be positive");
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

double log_bessel_i0(double x) {
    require(x >= 0.0 && std::isfinite(x), "log_bessel_i0: argument must be finite and >= 0");
    if (x < kBesselSeriesLimit) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<double>(k) * k);
            sum += term;
            if (term < kTailEps * sum) break;
        }
        return std::log(sum);
    }
    // Hankel expansion: I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k).
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (next > term) break;
        term = next;
        sum += term;
        if (term < kTailEps * sum) break;
    }
    return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

double bessel_i1_i0_ratio(double x) {
    require(x >= 0.0 && std::isfinite(x), "bessel_i1_i0_ratio: argument must be finite and >= 0");
    if (x < kBesselSeriesLimit) {
        const double q = 0.25 * x * x;
        double t0 = 1.0, s0 = 1.0;  // sum q^k / (k!)^2
        double t1 = 1.0, s1 = 1.0;  // sum q^k / (k! (k+1)!)
        for (int k = 1; k < 200; ++k) {
            t0 *= q / (static_cast<double>(k) * k);
            t1 *= q / (static_cast<double>(k) * (k + 1));
            s0 += t0;
            s1 += t1;
            if (t0 < kTailEps * s0 && t1 < kTailEps * s1) break;
        }
        return 0.5 * x * s1 / s0;
    }
    // Hankel expansions of I0 and I1 share the prefactor.
    double t0 = 1.0, s0 = 1.0;
    double t1 = 1.0, s1 = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = (2.0 * k - 1.0) * (2.0 * k - 1.0);
        const double n0 = t0 * odd / (8.0 * k * x);
        const double n1 = t1 * (odd - 4.0) / (8.0 * k * x);
        if (std::fabs(n0) > std::fabs(t0) || std::fabs(n1) > std::fabs(t1)) break;
        t0 = n0;
        t1 = n1;
        s0 += t0;
        s1 += t1;
        if (std::fabs(t0) < kTailEps * s0 && std::fabs(t1) < kTailEps * std::fabs(s1)) break;
    }
    return s1 / s0;
}

double log_regularized_lower_gamma(double a, double x) {
    require(a > 0.0 && std::isfinite(a), "regularized_lower_gamma: a must be finite and > 0");
    require(x >= 0.0, "regularized_lower_gamma: x must be >= 0");
    return log_lower_gamma_unchecked(a, x);
}

double regularized_lower_gamma(double a, double x) { return std::exp(log_regularized_lower_gamma(a, x)); }

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0, 1)");
    double x = acklam_normal_quantile(p);
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

double ncx2_logcdf(double x, const Ncx2Params& params) {
    require(!std::isnan(x), "ncx2_cdf: x is NaN");
    const double lc = ncx2_logcdf_impl(x, params.dof, params.noncentrality);
    // Above the median the upper tail carries the information.
    if (lc > -std::numbers::ln2) return std::log1p(-ncx2_sf(x, params));
    return lc;
}

double ncx2_cdf(double x, const Ncx2Params& params) {
    require(!std::isnan(x), "ncx2_cdf: x is NaN");
    const double lc = ncx2_logcdf_impl(x, params.dof, params.noncentrality);
    if (lc > -std::numbers::ln2) return 1.0 - ncx2_sf(x, params);
    return std::exp(lc);
}

double ncx2_sf(double x, const Ncx2Params& params) {
    require(!std::isnan(x), "ncx2_sf: x is NaN");
    return std::exp(ncx2_logsf_impl(x, params.dof, params.noncentrality));
}

double ncx2_logpdf(double x, const Ncx2Params& params) {
    require(x >= 0.0, "ncx2_pdf: x must be >= 0");
    if (std::isinf(x)) return -kInf;
    if (params.dof == 2) {
        const double lambda = params.noncentrality;
        return -std::numbers::ln2 - 0.5 * (x + lambda) + log_bessel_i0(std::sqrt(lambda * x));
    }
    return ncx2_logpdf_mixture(x, params.dof, params.noncentrality);
}

double ncx2_pdf(double x, const Ncx2Params& params) { return std::exp(ncx2_logpdf(x, params)); }

double ncx2_quantile_from_log(double log_p, const Ncx2Params& params) {
    require(log_p < 0.0, "ncx2_quantile: probability must lie in (0, 1)");
    const double k = params.dof;
    const double lambda = params.noncentrality;
    const double n0 = 0.5 * k;
    const double h = 0.5 * lambda;

    // Starting point: the smaller of the left-tail power law
    // F ~ e^{-h} y^{n0} / n0! and the Wilson-Hilferty cube-root normal
    // approximation applied to Patnaik's scaled central chi-square.
    const double x_small = 2.0 * std::exp((log_p + h + log_gamma_fast(n0 + 1.0)) / n0);
    double x = x_small;
    const double p = std::exp(log_p);
    if (p > 1e-300) {
        const double scale = (k + 2.0 * lambda) / (k + lambda);
        const double nu = (k + lambda) * (k + lambda) / (k + 2.0 * lambda);
        const double z = normal_quantile(p);
        const double base = 1.0 - 2.0 / (9.0 * nu) + z * std::sqrt(2.0 / (9.0 * nu));
        if (base > 0.0) {
            const double x_wh = scale * nu * base * base * base;
            if (x_wh > 0.0 && x_wh < x) x = x_wh;
        }
    }
    if (!(x > 0.0) || !std::isfinite(x)) x = k + lambda;

    // Safeguarded Newton on ln F as a function of ln x: exact for the
    // left-tail power law, and bracketed against overshoot.
    double lo = 0.0;
    double hi = kInf;
    for (int iter = 0; iter < 200; ++iter) {
        const double lf_cdf = ncx2_logcdf_impl(x, params.dof, lambda);
        const double diff = lf_cdf - log_p;
        if (diff < 0.0) lo = x; else hi = x;
        if (std::fabs(diff) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(log_p))) break;
        const double lf_pdf = ncx2_logpdf(x, params);
        const double slope = std::exp(std::log(x) + lf_pdf - lf_cdf);
        double next = x * std::exp(-diff / slope);
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            if (std::isinf(hi)) {
                next = 2.0 * std::max(x, lo);
            } else if (lo > 0.0 && hi / lo > 2.0) {
                next = std::sqrt(lo * hi);
            } else if (lo > 0.0) {
                next = 0.5 * (lo + hi);
            } else {
                next = 0.125 * hi;
            }
        }
        if (std::fabs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * x) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

double ncx2_quantile(double p, const Ncx2Params& params) {
    require(p > 0.0 && p < 1.0, "ncx2_quantile: p must lie in (0, 1)");
    return ncx2_quantile_from_log(std::log(p), params);
}

namespace {
// Table span in ln(p / mass) and node spacing. Below the span the generic
// solver takes over.
constexpr double kLeftSpan = 80.0;
constexpr double kLeftStep = 1.0 / 32.0;
}  // namespace

Ncx2LeftQuantile::Ncx2LeftQuantile(const Ncx2Params& params, double log_mass)
    : params_(params), log_mass_(std::min(log_mass, -1e-16)) {
    require(std::isfinite(log_mass), "Ncx2LeftQuantile: mass must be positive");
    const auto n = static_cast<std::size_t>(kLeftSpan / kLeftStep) + 1;
    log_x_.resize(n);
    dlog_x_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        // Offset first: log_mass_ - 80 + 80 can round up to 0 when the mass is 1.
        const double log_p = log_mass_ - (kLeftSpan - static_cast<double>(k) * kLeftStep);
        const double x = ncx2_quantile_from_log(log_p, params_);
        log_x_[k] = std::log(x);
        dlog_x_[k] = std::exp(log_p - log_x_[k] - ncx2_logpdf(x, params_));
    }
}

double Ncx2LeftQuantile::operator()(double log_p) const {
    log_p = std::min(log_p, log_mass_);
    const double pos = (log_p - log_mass_ + kLeftSpan) / kLeftStep;
    if (!(pos >= 0.0)) return ncx2_quantile_from_log(log_p, params_);
    const std::size_t k = std::min(static_cast<std::size_t>(pos), log_x_.size() - 2);
    const double t = pos - static_cast<double>(k);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double lx = (2 * t3 - 3 * t2 + 1) * log_x_[k] + (t3 - 2 * t2 + t) * kLeftStep * dlog_x_[k] +
                      (-2 * t3 + 3 * t2) * log_x_[k + 1] + (t3 - t2) * kLeftStep * dlog_x_[k + 1];
    double x = std::exp(lx);

    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(log_p));
    for (int iter = 0; iter < 8; ++iter) {
        const double lf_cdf = ncx2_logcdf_impl(x, params_.dof, params_.noncentrality);
        const double diff = lf_cdf - log_p;
        if (std::fabs(diff) <= tol) return x;
        const double slope = std::exp(std::log(x) + ncx2_logpdf(x, params_) - lf_cdf);
        const double next = x * std::exp(-diff / slope);
        if (!(next > 0.0) || !std::isfinite(next)) break;
        x = next;
        // Quadratic convergence: one step from here lands at rounding level.
        if (std::fabs(diff) < 1e-9) return x;
    }
    return ncx2_quantile_from_log(log_p, params_);
}

double marcum_q(int order, double a, double b) {
    require(order >= 1, "marcum_q: order must be >= 1");
    require(a >= 0.0 && b >= 0.0 && std::isfinite(a), "marcum_q: arguments must be >= 0");
    return ncx2_sf(b * b, Ncx2Params(2 * order, a * a));
}

}  // namespace outage
