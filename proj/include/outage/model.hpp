#pragma once

// Problem instance and the GSC/MRC combining statistic.
//
// Branch gains are CN(mu_i, 1) and the branch powers X_i = |h_i|^2 are modelled
// directly: X_i ~ (1/2) chi^2_2(2 mu_i^2). Only the line-of-sight magnitudes
// mu_i enter any formula.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace outage {

/// M branches, the m strongest are combined; outage when the combined
/// statistic is at or below gamma_th.
class ChannelConfig {
public:
    /// Explicit per-branch magnitudes; M = mu.size().
    ChannelConfig(std::size_t m, std::vector<double> mu, double gamma_th);

    /// M branches sharing one magnitude.
    static ChannelConfig identical(std::size_t M, std::size_t m, double mu, double gamma_th);

    std::size_t branches() const noexcept { return mu_.size(); }
    std::size_t combined() const noexcept { return m_; }
    double threshold() const noexcept { return gamma_th_; }
    const std::vector<double>& mu() const noexcept { return mu_; }

    /// Rician K-factor of branch i (LOS power over scattered power).
    double k_factor(std::size_t i) const { return mu_.at(i) * mu_.at(i); }
    /// Mean branch power E[X_i] = K_i + 1.
    double mean_power(std::size_t i) const { return k_factor(i) + 1.0; }

    /// Sum of mu_i^2.
    double los_energy() const noexcept;
    bool identical_means() const noexcept;

    ChannelConfig with_threshold(double gamma_th) const;

private:
    std::size_t m_;
    std::vector<double> mu_;
    double gamma_th_;
};

/// A sampler or estimator could not produce a result (as opposed to invalid
/// input, which is std::invalid_argument / std::domain_error).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Method { nmc, uis, pis, et, ce, mls };

std::string method_name(Method method);
/// Parses "nmc", "uis", ... ; throws std::invalid_argument otherwise.
Method parse_method(const std::string& name);

struct EstimateResult {
    Method method = Method::nmc;
    double p_hat = 0.0;
    /// Variance of the single-sample estimator, so Var(p_hat) = var_hat / samples.
    double var_hat = 0.0;
    /// Empirical variance of the per-sample estimator stream, when one exists.
    /// For UIS/PIS this is the cross-check against the closed form in var_hat.
    std::optional<double> sample_var;
    std::uint64_t samples = 0;
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    /// Machine-independent cost, in simulated branch vectors (pilots included).
    std::uint64_t work_units = 0;
    std::vector<std::string> warnings;
};

/// Sum of the m largest entries of x.
double gsc_statistic(std::span<const double> x, std::size_t m);

/// Same as gsc_statistic, but reorders x in place (no allocation).
double gsc_statistic_inplace(std::span<double> x, std::size_t m);

/// Exact outage probability when m = 1 (product of marginals) or m = M
/// (aggregate noncentral chi-square); empty otherwise.
std::optional<double> closed_form_outage(const ChannelConfig& config);

}  // namespace outage
