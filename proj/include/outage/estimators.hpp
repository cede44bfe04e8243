#pragma once

// The six outage-probability estimators.
//
// Every estimator is a pure function of (config, sample sizes, seed). Samples
// are generated in fixed-size chunks, each with its own Philox substream, and
// chunk results are merged in chunk order, so the result does not depend on
// RunOptions::workers.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "outage/model.hpp"
#include "outage/samplers.hpp"

namespace outage {

struct RunOptions {
    unsigned workers = 1;
    /// Samples per chunk. Part of the result's identity: changing it changes
    /// which random numbers are used.
    std::uint64_t chunk_size = 16384;
};

// ---------------------------------------------------------------- NMC / UIS

EstimateResult estimate_nmc(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                            const RunOptions& opts = {});

struct UisEstimate {
    EstimateResult result;
    /// P(all branches <= gamma_th), the selection-event probability.
    double ell1 = 0.0;
};

/// Product of the per-branch truncation masses.
double uis_selection_probability(const ChannelConfig& config);

UisEstimate estimate_uis(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                         const RunOptions& opts = {});

// ---------------------------------------------------------------------- PIS

struct PartitionBlock {
    std::size_t start = 0;
    std::size_t size = 0;
    /// sqrt of the block's sum of mu_i^2.
    double delta = 0.0;
};

/// Consecutive blocks of size m (q of them) and a remainder block of size
/// r = M mod m when r > 0.
struct PartitionPlan {
    std::vector<PartitionBlock> blocks;
    double ell2 = 0.0;
    double log_ell2 = 0.0;
};

/// Throws std::invalid_argument("PIS requires blockwise-identical means")
/// when a block mixes different mu values.
PartitionPlan make_partition_plan(const ChannelConfig& config);

struct PisEstimate {
    EstimateResult result;
    PartitionPlan plan;
    std::vector<MellBound> bounds;  // one per block
    RejectionStats rejection;
};

PisEstimate estimate_pis(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                         const RunOptions& opts = {}, double mode_constant = kDefaultModeConstant);

// ----------------------------------------------------------------------- ET

struct EtEstimate {
    EstimateResult result;
    /// Fraction of proposals inside the outage region.
    double hit_rate = 0.0;
};

/// ln of the likelihood ratio nominal / Exp(M/gamma_th) proposal at x.
double et_log_likelihood_ratio(const ChannelConfig& config, std::span<const double> x);

EtEstimate estimate_et(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                       const RunOptions& opts = {});

// ----------------------------------------------------------------------- CE

/// Parameters of the i.i.d. v1 * chi^2_2(v2) proposal family.
struct CEParams {
    double v1 = 0.5;
    double v2 = 0.0;
    int iteration = 0;
    double gamma_t = 0.0;
};

/// Row-major batch of dim-dimensional vectors with one log-likelihood ratio
/// per row.
struct SampleBlock {
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<double> log_lr;

    std::size_t rows() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

/// ln density of v1 * chi^2_2(v2) at y.
double scaled_ncx2_logpdf(double y, double v1, double v2);

/// Weighted log-likelihood sum_s w_s sum_i ln f(x_si; v1, v2) (zero weights skipped).
double ce_objective(const SampleBlock& samples, std::span<const double> weights, double v1, double v2);

struct CeUpdate {
    CEParams params;
    double objective = 0.0;
    /// Set when every weighted coordinate was zero.
    bool degenerate = false;
};

/// Weighted maximum-likelihood fit of (v1, v2) by safeguarded Newton.
CeUpdate ce_update(const SampleBlock& samples, std::span<const double> weights, const CEParams& current,
                   bool fix_v2_zero = false);

struct CeOptions {
    std::uint64_t pilot_samples = 100000;
    double rho = 0.1;
    int max_iterations = 50;
};

struct CeEstimate {
    EstimateResult result;
    /// One entry per adaptation step (the last is the update at gamma_th).
    std::vector<CEParams> trace;
};

CeEstimate estimate_ce(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                       const CeOptions& ce = {}, const RunOptions& opts = {});

// ---------------------------------------------------------------------- MLS

struct MlsSchedule {
    /// 0 = t_0 < t_1 < ... < t_L = 1.
    std::vector<double> levels;
    std::uint64_t per_level_samples = 0;
    /// Mean conditional survivor fraction per level (L entries).
    std::vector<double> survivor_fractions;
};

struct MlsPilot {
    MlsSchedule schedule;
    std::uint64_t work_units = 0;
    std::vector<std::string> warnings;
};

/// Greedy level construction: from t, the largest t' (to 1e-3) whose pilot
/// conditional survival probability is still >= target_cond_prob.
MlsPilot mls_pilot_levels(const ChannelConfig& config, std::uint64_t pilot_samples, double target_cond_prob,
                          std::uint64_t seed);

struct MlsOptions {
    std::uint64_t per_level_samples = 10000;
    std::uint64_t replications = 50;
    double target_cond_prob = 0.2;
    std::uint64_t pilot_samples = 10000;
    /// Fixed levels (t_1..t_L, ending at 1); the pilot runs when empty.
    std::optional<std::vector<double>> levels;
};

struct MlsEstimate {
    EstimateResult result;
    MlsSchedule schedule;
    std::uint64_t replications = 0;
    std::uint64_t zero_replications = 0;
    /// One product estimate per replication, in replication order.
    std::vector<double> replicate_estimates;
};

MlsEstimate estimate_mls(const ChannelConfig& config, std::uint64_t seed, const MlsOptions& mls = {},
                         const RunOptions& opts = {});

}  // namespace outage
