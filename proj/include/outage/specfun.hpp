#pragma once

// Special functions behind every distribution in the toolkit: log-scaled
// modified Bessel functions, the regularized incomplete gamma function and
// the noncentral chi-square law with even degrees of freedom.
//
// All routines are pure and thread-safe. Domain violations throw
// std::domain_error.

#include <vector>

namespace outage {

/// Noncentral chi-square law chi^2_dof(noncentrality) with even dof.
struct Ncx2Params {
    int dof;
    double noncentrality;

    Ncx2Params(int dof, double noncentrality);
};

/// ln I0(x) for x >= 0. Power series below x = 20, Hankel expansion above.
double log_bessel_i0(double x);

/// I1(x) / I0(x) for x >= 0, accurate for all finite x.
double bessel_i1_i0_ratio(double x);

/// ln Gamma(x) for x > 0 (reentrant).
double log_gamma(double x);

/// P(a, x) = gamma(a, x) / Gamma(a).
double regularized_lower_gamma(double a, double x);

/// ln P(a, x); finite even where P underflows.
double log_regularized_lower_gamma(double a, double x);

/// Standard normal quantile (Acklam's rational approximation polished by one
/// Halley step against erfc).
double normal_quantile(double p);

double ncx2_cdf(double x, const Ncx2Params& params);
double ncx2_logcdf(double x, const Ncx2Params& params);

/// Upper tail 1 - F, summed directly from the complementary gamma terms.
double ncx2_sf(double x, const Ncx2Params& params);

double ncx2_pdf(double x, const Ncx2Params& params);
double ncx2_logpdf(double x, const Ncx2Params& params);

/// Inverse CDF for p in (0, 1).
double ncx2_quantile(double p, const Ncx2Params& params);

/// Inverse CDF addressed by ln p (ln p < 0). Used where p itself would
/// underflow, e.g. deep left-tail truncation.
double ncx2_quantile_from_log(double log_p, const Ncx2Params& params);

/// Inverse CDF restricted to ln p <= log_mass, for repeated draws from one
/// law. A Hermite table of ln x against ln p supplies a start that one
/// Newton polish turns into the same root ncx2_quantile_from_log finds.
class Ncx2LeftQuantile {
public:
    Ncx2LeftQuantile(const Ncx2Params& params, double log_mass);

    double operator()(double log_p) const;
    double log_mass() const noexcept { return log_mass_; }

private:
    Ncx2Params params_;
    double log_mass_;
    std::vector<double> log_x_;
    std::vector<double> dlog_x_;  // d ln x / d ln p at the nodes
};

/// Generalized Marcum Q function Q_order(a, b) for integer order >= 1.
/// Q_order(a, b) = 1 - F(b^2; 2 order, a^2).
double marcum_q(int order, double a, double b);

}  // namespace outage
