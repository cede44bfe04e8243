#include "outage/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "outage/specfun.hpp"

namespace outage {

ChannelConfig::ChannelConfig(std::size_t m, std::vector<double> mu, double gamma_th)
    : m_(m), mu_(std::move(mu)), gamma_th_(gamma_th) {
    if (mu_.empty()) throw std::invalid_argument("channel needs at least one branch (M >= 1)");
    if (m_ < 1 || m_ > mu_.size()) throw std::invalid_argument("combined branches m must satisfy 1 <= m <= M");
    for (double v : mu_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("mu entries must be finite and >= 0");
    }
    if (!(gamma_th_ > 0.0) || !std::isfinite(gamma_th_)) throw std::invalid_argument("gamma_th must be finite and > 0");
}

ChannelConfig ChannelConfig::identical(std::size_t M, std::size_t m, double mu, double gamma_th) {
    return ChannelConfig(m, std::vector<double>(M, mu), gamma_th);
}

double ChannelConfig::los_energy() const noexcept {
    double sum = 0.0;
    for (double v : mu_) sum += v * v;
    return sum;
}

bool ChannelConfig::identical_means() const noexcept {
    return std::all_of(mu_.begin(), mu_.end(), [&](double v) { return v == mu_.front(); });
}

ChannelConfig ChannelConfig::with_threshold(double gamma_th) const { return ChannelConfig(m_, mu_, gamma_th); }

std::string method_name(Method method) {
    switch (method) {
        case Method::nmc: return "nmc";
        case Method::uis: return "uis";
        case Method::pis: return "pis";
        case Method::et: return "et";
        case Method::ce: return "ce";
        case Method::mls: return "mls";
    }
    return "unknown";
}

Method parse_method(const std::string& name) {
    for (Method m : {Method::nmc, Method::uis, Method::pis, Method::et, Method::ce, Method::mls}) {
        if (method_name(m) == name) return m;
    }
    throw std::invalid_argument("unknown method '" + name + "'");
}

double gsc_statistic_inplace(std::span<double> x, std::size_t m) {
    if (m > x.size()) throw std::domain_error("gsc_statistic: m exceeds the number of branches");
    if (m == 0) return 0.0;
    if (m == 1) return *std::max_element(x.begin(), x.end());
    // Summing in descending order makes the rounded result depend only on the
    // multiset of values, which keeps it monotone in each coordinate.
    const auto mid = x.begin() + static_cast<std::ptrdiff_t>(m);
    std::partial_sort(x.begin(), mid, x.end(), std::greater<>());
    return std::accumulate(x.begin(), mid, 0.0);
}

double gsc_statistic(std::span<const double> x, std::size_t m) {
    if (m > x.size()) throw std::domain_error("gsc_statistic: m exceeds the number of branches");
    if (x.size() <= 64) {
        std::array<double, 64> buf;
        std::copy(x.begin(), x.end(), buf.begin());
        return gsc_statistic_inplace(std::span<double>(buf.data(), x.size()), m);
    }
    std::vector<double> copy(x.begin(), x.end());
    return gsc_statistic_inplace(copy, m);
}

std::optional<double> closed_form_outage(const ChannelConfig& config) {
    const double two_gamma = 2.0 * config.threshold();
    const std::size_t M = config.branches();
    if (config.combined() == M) {
        return ncx2_cdf(two_gamma, Ncx2Params(static_cast<int>(2 * M), 2.0 * config.los_energy()));
    }
    if (config.combined() == 1) {
        double log_p = 0.0;
        for (double mu : config.mu()) log_p += ncx2_logcdf(two_gamma, Ncx2Params(2, 2.0 * mu * mu));
        return std::exp(log_p);
    }
    return std::nullopt;
}

}  // namespace outage
