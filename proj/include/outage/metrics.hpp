#pragma once

// Efficiency metrics for comparing estimators.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "outage/model.hpp"

namespace outage {

/// sqrt(var_hat / S) / p_hat. Throws std::domain_error when p_hat = 0.
double relative_error(const EstimateResult& result);

/// Squared coefficient of variation var_hat / p_hat^2 of the single-sample
/// estimator; independent of S.
double scv(const EstimateResult& result);

/// Work-normalized relative variance RE^2 * wall time.
double wnrv_time(const EstimateResult& result);

/// Machine-independent variant: scv * work_units / S.
double wnrv_work(const EstimateResult& result);

enum class IntervalKind { normal, chebyshev };

/// Two-sided multiplier for `level`: the normal quantile, or 1/sqrt(1-level)
/// when normality is not assumed.
double interval_multiplier(double level, IntervalKind kind = IntervalKind::normal);

/// p_hat (1 -/+ z RE), clipped to [0, 1].
std::pair<double, double> confidence_interval(const EstimateResult& result, double level,
                                              IntervalKind kind = IntervalKind::normal);

struct EfficiencyReport {
    double re = 0.0;
    double scv = 0.0;
    double wnrv = 0.0;
    double wnrv_work = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};
    std::uint64_t work_units = 0;
    std::vector<std::string> warnings;
};

/// All metrics at once. A zero estimate gives NaN for the ratio metrics.
EfficiencyReport efficiency(const EstimateResult& result);

/// Large-mean asymptote of ln M_l for a block of n branches with common
/// magnitude mu (valid for mu > 1 and gamma_th < 2 mu^2 - 2).
double log_m_ell_asymptotic(double mu, std::size_t n, double gamma_th);

/// exp(log_m_ell_asymptotic(...)); may overflow to +inf.
double m_ell_asymptotic(double mu, std::size_t n, double gamma_th);

}  // namespace outage
