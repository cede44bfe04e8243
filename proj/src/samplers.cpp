#include "outage/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "outage/specfun.hpp"

namespace outage {
namespace {

// Floating-point slack before a log ratio above 0 counts as a bound violation.
constexpr double kViolationSlack = 1e-11;
constexpr std::size_t kMaxBatch = 4096;

inline double std_exponential(Engine& eng) { return -std::log(uniform_open01(eng)); }

}  // namespace

double sample_nominal_branch(double mu, Engine& eng) {
    const double e = std_exponential(eng);
    const double c = std::cos(2.0 * std::numbers::pi * uniform_open01(eng));
    return std::max(0.0, e + mu * mu + 2.0 * mu * std::sqrt(e) * c);
}

double sample_nominal_branch_gaussian(double mu, Engine& eng) {
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
    const double re = mu + normal(eng);
    const double im = normal(eng);
    return re * re + im * im;
}

void sample_nominal_into(std::span<double> out, const ChannelConfig& config, Engine& eng) {
    const auto& mu = config.mu();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sample_nominal_branch(mu[i], eng);
}

std::vector<double> sample_nominal(const ChannelConfig& config, Engine& eng) {
    std::vector<double> x(config.branches());
    sample_nominal_into(x, config, eng);
    return x;
}

TruncatedBranchSampler::TruncatedBranchSampler(double mu, double gamma_th)
    : lambda_(2.0 * mu * mu), gamma_th_(gamma_th) {
    if (!(gamma_th > 0.0)) throw std::domain_error("truncated sampler: gamma_th must be > 0");
    log_mass_ = ncx2_logcdf(2.0 * gamma_th, Ncx2Params(2, lambda_));
    mass_ = std::exp(log_mass_);
    if (!std::isfinite(log_mass_) || mass_ == 0.0) {
        throw EstimationError("threshold too extreme for truncated inverse transform");
    }
    quantile_ = std::make_shared<const Ncx2LeftQuantile>(Ncx2Params(2, lambda_), log_mass_);
}

double TruncatedBranchSampler::operator()(Engine& eng) const {
    const double log_p = log_mass_ + std::log(uniform_open01(eng));
    // The clamp only absorbs last-ulp overshoot of the root finder.
    return std::min(gamma_th_, 0.5 * (*quantile_)(log_p));
}

double sample_truncated_univariate(double mu, double gamma_th, Engine& eng) {
    // One-off draw: the generic solver beats building a table.
    if (!(gamma_th > 0.0)) throw std::domain_error("truncated sampler: gamma_th must be > 0");
    const Ncx2Params params(2, 2.0 * mu * mu);
    const double log_mass = ncx2_logcdf(2.0 * gamma_th, params);
    if (!std::isfinite(log_mass) || std::exp(log_mass) == 0.0) {
        throw EstimationError("threshold too extreme for truncated inverse transform");
    }
    const double log_p = log_mass + std::log(uniform_open01(eng));
    return std::min(gamma_th, 0.5 * ncx2_quantile_from_log(log_p, params));
}

void sample_uniform_simplex_into(std::span<double> out, double gamma_th, Engine& eng) {
    double total = std_exponential(eng);  // slack coordinate
    for (double& v : out) {
        v = std_exponential(eng);
        total += v;
    }
    const double scale = gamma_th / total;
    for (double& v : out) v *= scale;
}

std::vector<double> sample_uniform_simplex(std::size_t n, double gamma_th, Engine& eng) {
    if (n == 0) throw std::invalid_argument("simplex dimension must be >= 1");
    if (!(gamma_th > 0.0)) throw std::invalid_argument("simplex size must be > 0");
    std::vector<double> x(n);
    sample_uniform_simplex_into(x, gamma_th, eng);
    return x;
}

const char* mell_case_name(MellCase c) {
    switch (c) {
        case MellCase::small_mean: return "small_mean";
        case MellCase::large_mean_small_gamma: return "large_mean_small_gamma";
        case MellCase::large_mean_large_gamma: return "large_mean_large_gamma";
    }
    return "unknown";
}

MellBound compute_m_ell(double mu, std::size_t n, double gamma_th, double mode_constant) {
    if (n == 0) throw std::invalid_argument("compute_m_ell: block size must be >= 1");
    if (!(gamma_th > 0.0)) throw std::invalid_argument("compute_m_ell: gamma_th must be > 0");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw std::invalid_argument("compute_m_ell: mu must be finite and >= 0");

    const double nd = static_cast<double>(n);
    const double lambda = 2.0 * mu * mu;
    const double log_block_mass = ncx2_logcdf(2.0 * gamma_th, Ncx2Params(static_cast<int>(2 * n), nd * lambda));
    const double log_norm = log_gamma(nd + 1.0) + log_block_mass;

    MellBound b;
    b.block_mu = mu;
    b.block_size = n;
    if (mu <= 1.0) {
        // e^{-x} I0(2 mu sqrt x) is maximal at x = 0.
        b.branch = MellCase::small_mean;
        b.log_value = nd * (std::log(gamma_th) - mu * mu) - log_norm;
    } else if (gamma_th <= mu * mu - 1.0) {
        // 2 gamma_th lies left of the chi-square mode, so the density is
        // largest at the edge of the block.
        b.branch = MellCase::large_mean_small_gamma;
        const double log_f = ncx2_logpdf(2.0 * gamma_th, Ncx2Params(2, lambda));
        b.log_value = nd * (std::log(2.0 * gamma_th) + log_f) - log_norm;
    } else {
        b.branch = MellCase::large_mean_large_gamma;
        const double near_mode = lambda - 2.0 + 3.0 / (2.0 * lambda);
        const double log_f = ncx2_logpdf(near_mode, Ncx2Params(2, lambda));
        b.log_value = nd * (std::log(2.0 * gamma_th * mode_constant) + log_f) - log_norm;
    }
    b.value = std::exp(b.log_value);
    return b;
}

void RejectionStats::merge(const RejectionStats& other) noexcept {
    proposals += other.proposals;
    accepted += other.accepted;
    violations += other.violations;
    max_log_ratio = std::max(max_log_ratio, other.max_log_ratio);
}

PisBlockSampler::PisBlockSampler(double mu, std::size_t n, double gamma_th, double mode_constant)
    : mu_(mu), n_(n), gamma_th_(gamma_th), bound_(compute_m_ell(mu, n, gamma_th, mode_constant)) {
    const double nd = static_cast<double>(n);
    log_mass_ = ncx2_logcdf(2.0 * gamma_th, Ncx2Params(static_cast<int>(2 * n), 2.0 * nd * mu * mu));
    // ln of the constant part of f/(M_l g): target normalizer and the uniform
    // simplex density n!/gamma^n.
    log_const_ = -nd * mu * mu + nd * std::log(gamma_th) - log_gamma(nd + 1.0) - log_mass_ - bound_.log_value;
    const double expected = std::ceil(std::min(bound_.value, static_cast<double>(kMaxBatch)));
    batch_ = std::max<std::size_t>(1, static_cast<std::size_t>(expected));
    proposals_.resize(batch_ * n_);
    uniforms_.resize(batch_);
}

double PisBlockSampler::log_acceptance_ratio(std::span<const double> x) const {
    double s = log_const_;
    const double two_mu = 2.0 * mu_;
    for (double v : x) s += -v + (mu_ > 0.0 ? log_bessel_i0(two_mu * std::sqrt(v)) : 0.0);
    return s;
}

void PisBlockSampler::refill(Engine& eng) {
    for (std::size_t k = 0; k < batch_; ++k) {
        sample_uniform_simplex_into(std::span<double>(proposals_.data() + k * n_, n_), gamma_th_, eng);
        uniforms_[k] = uniform_open01(eng);
    }
    cursor_ = 0;
    filled_ = batch_;
}

void PisBlockSampler::draw(std::span<double> out, Engine& eng) {
    const double limit = 1e4 * std::max(1.0, bound_.value);
    double trials = 0.0;
    for (;;) {
        if (cursor_ == filled_) refill(eng);
        const std::span<const double> x(proposals_.data() + cursor_ * n_, n_);
        const double log_u = std::log(uniforms_[cursor_]);
        ++cursor_;
        ++stats_.proposals;
        trials += 1.0;
        const double lr = log_acceptance_ratio(x);
        if (lr > kViolationSlack) ++stats_.violations;
        stats_.max_log_ratio = std::max(stats_.max_log_ratio, lr);
        if (log_u <= lr) {
            std::copy(x.begin(), x.end(), out.begin());
            ++stats_.accepted;
            return;
        }
        if (trials > limit) throw EstimationError("rejection sampler stalled");
    }
}

std::vector<double> sample_pis_block(double mu, std::size_t n, double gamma_th, Engine& eng) {
    PisBlockSampler sampler(mu, n, gamma_th);
    std::vector<double> x(n);
    sampler.draw(x, eng);
    return x;
}

double exponential_variate(double rate, Engine& eng) { return std_exponential(eng) / rate; }

std::vector<double> sample_exponential(double rate, std::size_t n, Engine& eng) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be > 0");
    std::vector<double> x(n);
    for (double& v : x) v = exponential_variate(rate, eng);
    return x;
}

double scaled_ncx2_variate(double v1, double v2, Engine& eng) {
    // chi^2_2(v2) = v2 + 2 sqrt(2 v2 E) cos(2 pi U) + 2E.
    const double e = std_exponential(eng);
    const double c = std::cos(2.0 * std::numbers::pi * uniform_open01(eng));
    return v1 * std::max(0.0, v2 + 2.0 * std::sqrt(2.0 * v2 * e) * c + 2.0 * e);
}

std::vector<double> sample_scaled_ncx2(double v1, double v2, std::size_t n, Engine& eng) {
    if (!(v1 > 0.0) || !(v2 >= 0.0)) throw std::invalid_argument("scaled ncx2 needs v1 > 0 and v2 >= 0");
    std::vector<double> x(n);
    for (double& v : x) v = scaled_ncx2_variate(v1, v2, eng);
    return x;
}

double gamma_increment(double shape, Engine& eng) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
    return std::gamma_distribution<double>(shape, 1.0)(eng);
}

}  // namespace outage
