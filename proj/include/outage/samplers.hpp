#pragma once

// Random variate generation for the nominal channel and every proposal
// density used by the estimators. All samplers draw from an Engine that the
// caller owns; nothing here keeps global state.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "outage/model.hpp"
#include "outage/rng.hpp"
#include "outage/specfun.hpp"

namespace outage {

/// One branch power X ~ (1/2) chi^2_2(2 mu^2), drawn in polar form:
/// X = E + mu^2 + 2 mu sqrt(E) cos(2 pi U), E ~ Exp(1).
double sample_nominal_branch(double mu, Engine& eng);

/// The same law built from two Gaussians, X = |mu + CN(0, 1)|^2 (variance 1/2
/// per real dimension). Slower; kept as an independent route.
double sample_nominal_branch_gaussian(double mu, Engine& eng);

void sample_nominal_into(std::span<double> out, const ChannelConfig& config, Engine& eng);
std::vector<double> sample_nominal(const ChannelConfig& config, Engine& eng);

/// X | X <= gamma_th for one branch, by inverse transform of the scaled
/// noncentral chi-square CDF. The truncation mass is computed once.
class TruncatedBranchSampler {
public:
    TruncatedBranchSampler(double mu, double gamma_th);

    double operator()(Engine& eng) const;

    /// P(X <= gamma_th).
    double mass() const noexcept { return mass_; }
    double log_mass() const noexcept { return log_mass_; }

private:
    double lambda_;
    double gamma_th_;
    double log_mass_;
    double mass_;
    std::shared_ptr<const Ncx2LeftQuantile> quantile_;  // shared by copies
};

double sample_truncated_univariate(double mu, double gamma_th, Engine& eng);

/// Uniform point of the solid simplex {x >= 0, sum x <= gamma_th}, from
/// n + 1 exponential spacings.
void sample_uniform_simplex_into(std::span<double> out, double gamma_th, Engine& eng);
std::vector<double> sample_uniform_simplex(std::size_t n, double gamma_th, Engine& eng);

/// Which density bound the rejection constant was built from.
enum class MellCase {
    small_mean,              // mu <= 1: branch density peaks at 0
    large_mean_small_gamma,  // density increasing on [0, gamma_th]
    large_mean_large_gamma,  // interior mode, bounded through the constant C
};

const char* mell_case_name(MellCase c);

/// Default density-bound constant for the interior-mode case.
inline constexpr double kDefaultModeConstant = 1.031;

/// Rejection constant for sampling n identical branches conditioned on
/// their sum being at most gamma_th, using a uniform simplex proposal.
struct MellBound {
    double value = 1.0;
    double log_value = 0.0;
    MellCase branch = MellCase::small_mean;
    double block_mu = 0.0;
    std::size_t block_size = 1;
};

MellBound compute_m_ell(double mu, std::size_t n, double gamma_th, double mode_constant = kDefaultModeConstant);

struct RejectionStats {
    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;
    /// Proposals where the target/proposal ratio exceeded the bound.
    std::uint64_t violations = 0;
    double max_log_ratio = -1e300;

    void merge(const RejectionStats& other) noexcept;
    double acceptance_rate() const noexcept {
        return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
    }
};

/// Acceptance-rejection sampler for one partition block: n branches with a
/// common mean, conditioned on sum <= gamma_th. Proposals are drawn in
/// batches of ceil(M_l); leftovers carry over to the next call.
class PisBlockSampler {
public:
    PisBlockSampler(double mu, std::size_t n, double gamma_th, double mode_constant = kDefaultModeConstant);

    /// Writes one accepted block into out (size n).
    void draw(std::span<double> out, Engine& eng);

    /// ln[f(x) / (M_l g(x))] for a point of the simplex.
    double log_acceptance_ratio(std::span<const double> x) const;

    const MellBound& bound() const noexcept { return bound_; }
    const RejectionStats& stats() const noexcept { return stats_; }
    std::size_t size() const noexcept { return n_; }
    /// P(sum of the block <= gamma_th).
    double log_block_mass() const noexcept { return log_mass_; }

private:
    void refill(Engine& eng);

    double mu_;
    std::size_t n_;
    double gamma_th_;
    MellBound bound_;
    double log_mass_;
    double log_const_;
    std::size_t batch_;
    std::vector<double> proposals_;
    std::vector<double> uniforms_;
    std::size_t cursor_ = 0;
    std::size_t filled_ = 0;
    RejectionStats stats_;
};

std::vector<double> sample_pis_block(double mu, std::size_t n, double gamma_th, Engine& eng);

double exponential_variate(double rate, Engine& eng);
std::vector<double> sample_exponential(double rate, std::size_t n, Engine& eng);

/// v1 * chi^2_2(v2).
double scaled_ncx2_variate(double v1, double v2, Engine& eng);
std::vector<double> sample_scaled_ncx2(double v1, double v2, std::size_t n, Engine& eng);

/// Gamma(shape, 1); any shape > 0.
double gamma_increment(double shape, Engine& eng);

}  // namespace outage
