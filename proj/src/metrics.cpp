#include "outage/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "outage/specfun.hpp"

namespace outage {

double relative_error(const EstimateResult& result) {
    if (!(result.p_hat > 0.0)) throw std::domain_error("degenerate estimate, RE undefined");
    if (result.samples == 0) throw std::domain_error("no samples, RE undefined");
    return std::sqrt(result.var_hat / static_cast<double>(result.samples)) / result.p_hat;
}

double scv(const EstimateResult& result) {
    if (!(result.p_hat > 0.0)) throw std::domain_error("degenerate estimate, SCV undefined");
    return result.var_hat / (result.p_hat * result.p_hat);
}

double wnrv_time(const EstimateResult& result) {
    const double re = relative_error(result);
    return re * re * result.wall_time_s;
}

double wnrv_work(const EstimateResult& result) {
    return scv(result) * static_cast<double>(result.work_units) / static_cast<double>(result.samples);
}

double interval_multiplier(double level, IntervalKind kind) {
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("confidence level must lie in (0, 1)");
    if (kind == IntervalKind::chebyshev) return 1.0 / std::sqrt(1.0 - level);
    return normal_quantile(0.5 * (1.0 + level));
}

std::pair<double, double> confidence_interval(const EstimateResult& result, double level, IntervalKind kind) {
    const double z = interval_multiplier(level, kind);
    if (result.p_hat == 0.0) return {0.0, 0.0};
    const double re = relative_error(result);
    const double lo = std::clamp(result.p_hat * (1.0 - z * re), 0.0, 1.0);
    const double hi = std::clamp(result.p_hat * (1.0 + z * re), 0.0, 1.0);
    return {lo, hi};
}

EfficiencyReport efficiency(const EstimateResult& result) {
    EfficiencyReport e;
    e.work_units = result.work_units;
    if (result.wall_time_s == 0.0) e.warnings.push_back("wall time not recorded; time-based WNRV is 0");
    if (!(result.p_hat > 0.0)) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        e.re = e.scv = e.wnrv = e.wnrv_work = nan;
        return e;
    }
    e.re = relative_error(result);
    e.scv = scv(result);
    e.wnrv = e.re * e.re * result.wall_time_s;
    e.wnrv_work = wnrv_work(result);
    e.ci95 = confidence_interval(result, 0.95);
    return e;
}

double log_m_ell_asymptotic(double mu, std::size_t n, double gamma_th) {
    if (n == 0) throw std::invalid_argument("block size must be >= 1");
    if (!(mu > 0.0) || !(gamma_th > 0.0)) throw std::invalid_argument("mu and gamma_th must be > 0");
    const double m = static_cast<double>(n);
    return (2.0 * m + 1.0) / 4.0 * std::log(m) + (m + 1.0) / 4.0 * std::log(gamma_th) -
           (m - 1.0) * std::numbers::ln2 - log_gamma(m + 1.0) - (m - 1.0) / 2.0 * std::log(std::numbers::pi) -
           (m - 1.0) * gamma_th + (m + 1.0) / 2.0 * std::log(mu) +
           2.0 * std::sqrt(gamma_th) * (m - std::sqrt(m)) * mu;
}

double m_ell_asymptotic(double mu, std::size_t n, double gamma_th) {
    return std::exp(log_m_ell_asymptotic(mu, n, gamma_th));
}

}  // namespace outage
