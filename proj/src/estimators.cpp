#include "outage/estimators.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "outage/specfun.hpp"
#include "parallel.hpp"

namespace outage {
namespace {

using detail::MomentAccumulator;
using detail::run_chunks;

// Stream ids keep the methods' random numbers disjoint under one seed.
enum Stream : std::uint64_t { kNmc = 1, kUis = 2, kPis = 3, kEt = 4, kCe = 5, kMls = 6, kMlsPilot = 7 };

constexpr std::size_t kMaxBranches = 64;

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void require_samples(std::uint64_t samples) {
    if (samples < 1) throw std::invalid_argument("sample count must be >= 1");
}

void require_branches(const ChannelConfig& config) {
    if (config.branches() > kMaxBranches) throw std::invalid_argument("at most 64 branches are supported");
}

struct ChunkResult {
    MomentAccumulator acc;
    std::uint64_t hits = 0;
    RejectionStats rejection;
};

// Splits `samples` into chunks and runs body(engine, count, result) on each.
template <class Body>
ChunkResult sample_in_chunks(std::uint64_t samples, std::uint64_t seed, std::uint64_t stream, std::uint64_t phase,
                             const RunOptions& opts, double& wall, Body&& body) {
    const std::uint64_t chunk = std::max<std::uint64_t>(1, opts.chunk_size);
    const std::size_t n_chunks = static_cast<std::size_t>((samples + chunk - 1) / chunk);
    Stopwatch clock;
    auto parts = run_chunks<ChunkResult>(n_chunks, opts.workers, [&](std::size_t c) {
        Engine eng(RngStream{seed, stream}, phase, c);
        const std::uint64_t begin = c * chunk;
        const std::uint64_t count = std::min(chunk, samples - begin);
        ChunkResult r;
        body(eng, count, r);
        return r;
    });
    wall = clock.seconds();
    ChunkResult total;
    for (const auto& p : parts) {
        total.acc.merge(p.acc);
        total.hits += p.hits;
        total.rejection.merge(p.rejection);
    }
    return total;
}

EstimateResult base_result(Method method, std::uint64_t samples, std::uint64_t seed) {
    EstimateResult r;
    r.method = method;
    r.samples = samples;
    r.seed = seed;
    r.work_units = samples;
    return r;
}

// ln I0(2 mu sqrt x) with the mu = 0 shortcut.
inline double log_i0_branch(double mu, double x) { return mu > 0.0 ? log_bessel_i0(2.0 * mu * std::sqrt(x)) : 0.0; }

}  // namespace

// ---------------------------------------------------------------- NMC / UIS

EstimateResult estimate_nmc(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                            const RunOptions& opts) {
    require_samples(samples);
    require_branches(config);
    const std::size_t M = config.branches();
    const std::size_t m = config.combined();
    const double gamma = config.threshold();
    EstimateResult r = base_result(Method::nmc, samples, seed);
    const ChunkResult total = sample_in_chunks(samples, seed, kNmc, 0, opts, r.wall_time_s,
                                               [&](Engine& eng, std::uint64_t count, ChunkResult& out) {
                                                   std::array<double, kMaxBranches> x;
                                                   const std::span<double> xs(x.data(), M);
                                                   for (std::uint64_t s = 0; s < count; ++s) {
                                                       sample_nominal_into(xs, config, eng);
                                                       if (gsc_statistic_inplace(xs, m) <= gamma) ++out.hits;
                                                   }
                                               });
    const double n = static_cast<double>(samples);
    r.p_hat = static_cast<double>(total.hits) / n;
    r.var_hat = r.p_hat * (1.0 - r.p_hat);
    r.sample_var = samples > 1 ? r.var_hat * n / (n - 1.0) : 0.0;
    if (total.hits == 0) r.warnings.push_back("no outage event observed");
    return r;
}

double uis_selection_probability(const ChannelConfig& config) {
    double log_ell = 0.0;
    for (double mu : config.mu()) log_ell += ncx2_logcdf(2.0 * config.threshold(), Ncx2Params(2, 2.0 * mu * mu));
    return std::exp(log_ell);
}

UisEstimate estimate_uis(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                         const RunOptions& opts) {
    require_samples(samples);
    require_branches(config);
    const std::size_t M = config.branches();
    const std::size_t m = config.combined();
    const double gamma = config.threshold();

    std::vector<TruncatedBranchSampler> branch;
    branch.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        const auto& mu = config.mu();
        if (i > 0 && mu[i] == mu[i - 1]) branch.push_back(branch.back());
        else branch.emplace_back(mu[i], gamma);
    }
    double log_ell1 = 0.0;
    for (const auto& b : branch) log_ell1 += b.log_mass();
    const double ell1 = std::exp(log_ell1);

    UisEstimate out;
    out.ell1 = ell1;
    EstimateResult& r = out.result;
    r = base_result(Method::uis, samples, seed);
    const ChunkResult total = sample_in_chunks(samples, seed, kUis, 0, opts, r.wall_time_s,
                                               [&](Engine& eng, std::uint64_t count, ChunkResult& res) {
                                                   std::array<double, kMaxBranches> x;
                                                   const std::span<double> xs(x.data(), M);
                                                   for (std::uint64_t s = 0; s < count; ++s) {
                                                       for (std::size_t i = 0; i < M; ++i) x[i] = branch[i](eng);
                                                       const bool hit = gsc_statistic_inplace(xs, m) <= gamma;
                                                       res.hits += hit;
                                                       res.acc.add(hit ? ell1 : 0.0);
                                                   }
                                               });
    r.p_hat = ell1 * static_cast<double>(total.hits) / static_cast<double>(samples);
    r.var_hat = std::max(0.0, ell1 * r.p_hat - r.p_hat * r.p_hat);
    r.sample_var = total.acc.variance();
    if (total.hits == 0) r.warnings.push_back("no outage event observed");
    return out;
}

// ---------------------------------------------------------------------- PIS

PartitionPlan make_partition_plan(const ChannelConfig& config) {
    const std::size_t M = config.branches();
    const std::size_t m = config.combined();
    const auto& mu = config.mu();
    PartitionPlan plan;
    for (std::size_t start = 0; start < M; start += m) {
        const std::size_t size = std::min(m, M - start);
        double energy = 0.0;
        for (std::size_t i = start; i < start + size; ++i) {
            if (mu[i] != mu[start]) throw std::invalid_argument("PIS requires blockwise-identical means");
            energy += mu[i] * mu[i];
        }
        plan.blocks.push_back({start, size, std::sqrt(energy)});
        plan.log_ell2 += ncx2_logcdf(2.0 * config.threshold(), Ncx2Params(static_cast<int>(2 * size), 2.0 * energy));
    }
    plan.ell2 = std::exp(plan.log_ell2);
    return plan;
}

PisEstimate estimate_pis(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                         const RunOptions& opts, double mode_constant) {
    require_samples(samples);
    require_branches(config);
    const std::size_t M = config.branches();
    const std::size_t m = config.combined();
    const double gamma = config.threshold();

    PisEstimate out;
    out.plan = make_partition_plan(config);
    for (const auto& b : out.plan.blocks) out.bounds.push_back(compute_m_ell(config.mu()[b.start], b.size, gamma, mode_constant));
    const double ell2 = out.plan.ell2;

    EstimateResult& r = out.result;
    r = base_result(Method::pis, samples, seed);
    const ChunkResult total = sample_in_chunks(
        samples, seed, kPis, 0, opts, r.wall_time_s, [&](Engine& eng, std::uint64_t count, ChunkResult& res) {
            std::vector<PisBlockSampler> samplers;
            for (const auto& b : out.plan.blocks) samplers.emplace_back(config.mu()[b.start], b.size, gamma, mode_constant);
            std::array<double, kMaxBranches> x;
            const std::span<double> xs(x.data(), M);
            for (std::uint64_t s = 0; s < count; ++s) {
                for (std::size_t k = 0; k < samplers.size(); ++k) {
                    const auto& b = out.plan.blocks[k];
                    samplers[k].draw(xs.subspan(b.start, b.size), eng);
                }
                const bool hit = gsc_statistic_inplace(xs, m) <= gamma;
                res.hits += hit;
                res.acc.add(hit ? ell2 : 0.0);
            }
            for (const auto& sp : samplers) res.rejection.merge(sp.stats());
        });
    out.rejection = total.rejection;
    r.p_hat = ell2 * static_cast<double>(total.hits) / static_cast<double>(samples);
    r.var_hat = std::max(0.0, ell2 * r.p_hat - r.p_hat * r.p_hat);
    r.sample_var = total.acc.variance();
    r.work_units = samples;
    if (total.hits == 0) r.warnings.push_back("no outage event observed");
    if (total.rejection.violations > 0) {
        r.warnings.push_back("rejection bound violated on " + std::to_string(total.rejection.violations) +
                             " proposals");
    }
    return out;
}

// ----------------------------------------------------------------------- ET

double et_log_likelihood_ratio(const ChannelConfig& config, std::span<const double> x) {
    const double Md = static_cast<double>(config.branches());
    const double gamma = config.threshold();
    double sum_x = 0.0;
    double log_i0 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum_x += x[i];
        log_i0 += log_i0_branch(config.mu()[i], x[i]);
    }
    return Md * std::log(gamma) - Md * std::log(Md) - config.los_energy() + (Md - gamma) / gamma * sum_x + log_i0;
}

EtEstimate estimate_et(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed,
                       const RunOptions& opts) {
    require_samples(samples);
    require_branches(config);
    const std::size_t M = config.branches();
    const std::size_t m = config.combined();
    const double gamma = config.threshold();
    const double rate = static_cast<double>(M) / gamma;

    EtEstimate out;
    EstimateResult& r = out.result;
    r = base_result(Method::et, samples, seed);
    const ChunkResult total = sample_in_chunks(samples, seed, kEt, 0, opts, r.wall_time_s,
                                               [&](Engine& eng, std::uint64_t count, ChunkResult& res) {
                                                   std::array<double, kMaxBranches> x;
                                                   std::array<double, kMaxBranches> scratch;
                                                   for (std::uint64_t s = 0; s < count; ++s) {
                                                       for (std::size_t i = 0; i < M; ++i) {
                                                           x[i] = exponential_variate(rate, eng);
                                                           scratch[i] = x[i];
                                                       }
                                                       const bool hit =
                                                           gsc_statistic_inplace(std::span<double>(scratch.data(), M), m) <= gamma;
                                                       if (hit) {
                                                           ++res.hits;
                                                           res.acc.add(std::exp(et_log_likelihood_ratio(
                                                               config, std::span<const double>(x.data(), M))));
                                                       } else {
                                                           res.acc.add(0.0);
                                                       }
                                                   }
                                               });
    r.p_hat = total.acc.mean;
    r.var_hat = total.acc.variance();
    r.sample_var = r.var_hat;
    out.hit_rate = static_cast<double>(total.hits) / static_cast<double>(samples);
    if (total.hits == 0) r.warnings.push_back("no outage event observed");
    return out;
}

// ----------------------------------------------------------------------- CE

double scaled_ncx2_logpdf(double y, double v1, double v2) {
    const double log_i0 = v2 > 0.0 ? log_bessel_i0(std::sqrt(v2 * y / v1)) : 0.0;
    return -std::log(2.0 * v1) - y / (2.0 * v1) - 0.5 * v2 + log_i0;
}

namespace {

struct WeightedCoord {
    double y;
    double w;
};

std::vector<WeightedCoord> weighted_coords(const SampleBlock& samples, std::span<const double> weights) {
    if (weights.size() != samples.rows()) throw std::invalid_argument("ce_update: one weight per sample row required");
    std::vector<WeightedCoord> c;
    for (std::size_t s = 0; s < samples.rows(); ++s) {
        if (!(weights[s] > 0.0)) continue;
        for (double y : samples.row(s)) c.push_back({y, weights[s]});
    }
    return c;
}

// psi(s) = ln I0(sqrt s) and its first two derivatives.
struct Psi {
    double d1;
    double d2;
};

inline Psi psi_derivatives(double s) {
    if (s < 1e-3) {
        // ln I0(z) = z^2/4 - z^4/64 + z^6/576 - 11 z^8/49152 + 19 z^10/409600 - ...
        return {0.25 - s / 32.0 + s * s / 192.0 - 11.0 * s * s * s / 12288.0,
                -1.0 / 32.0 + s / 96.0 - 33.0 * s * s / 12288.0};
    }
    const double z = std::sqrt(s);
    const double ratio = bessel_i1_i0_ratio(z);
    return {ratio / (2.0 * z), (z * (1.0 - ratio * ratio) - 2.0 * ratio) / (4.0 * z * z * z)};
}

// Objective normalized by total weight, as a function of (ln v1, v2).
double mean_loglik(const std::vector<WeightedCoord>& c, double total_w, double theta, double v2) {
    const double v1 = std::exp(theta);
    double sum = 0.0;
    for (const auto& wc : c) sum += wc.w * scaled_ncx2_logpdf(wc.y, v1, v2);
    return sum / total_w;
}

struct Derivs {
    double g_theta = 0, g_v2 = 0, h_tt = 0, h_tv = 0, h_vv = 0;
};

Derivs mean_loglik_derivs(const std::vector<WeightedCoord>& c, double total_w, double theta, double v2) {
    const double inv_v1 = std::exp(-theta);
    Derivs d;
    for (const auto& wc : c) {
        const double r = wc.y * inv_v1;
        const double s = v2 * r;
        const Psi p = psi_derivatives(s);
        d.g_theta += wc.w * (-1.0 + 0.5 * r - p.d1 * s);
        d.g_v2 += wc.w * (-0.5 + p.d1 * r);
        d.h_tt += wc.w * (-0.5 * r + p.d2 * s * s + p.d1 * s);
        d.h_tv += wc.w * (-r * (p.d2 * s + p.d1));
        d.h_vv += wc.w * (p.d2 * r * r);
    }
    d.g_theta /= total_w;
    d.g_v2 /= total_w;
    d.h_tt /= total_w;
    d.h_tv /= total_w;
    d.h_vv /= total_w;
    return d;
}

constexpr double kV1Min = 1e-12;
constexpr double kV1Max = 1e12;
constexpr double kV2Max = 1e12;

}  // namespace

double ce_objective(const SampleBlock& samples, std::span<const double> weights, double v1, double v2) {
    double sum = 0.0;
    for (std::size_t s = 0; s < samples.rows(); ++s) {
        if (!(weights[s] > 0.0)) continue;
        for (double y : samples.row(s)) sum += weights[s] * scaled_ncx2_logpdf(y, v1, v2);
    }
    return sum;
}

CeUpdate ce_update(const SampleBlock& samples, std::span<const double> weights, const CEParams& current,
                   bool fix_v2_zero) {
    const auto coords = weighted_coords(samples, weights);
    if (coords.empty()) throw std::invalid_argument("ce_update: at least one positive weight required");
    double total_w = 0.0, sum_wy = 0.0;
    for (const auto& c : coords) {
        total_w += c.w;
        sum_wy += c.w * c.y;
    }
    CeUpdate out;
    out.params = current;
    if (!(sum_wy > 0.0)) {
        out.params.v1 = kV1Min;
        out.params.v2 = 0.0;
        out.degenerate = true;
        out.objective = ce_objective(samples, weights, out.params.v1, out.params.v2);
        return out;
    }
    const double m1 = sum_wy / total_w;
    double var = 0.0;
    for (const auto& c : coords) var += c.w * (c.y - m1) * (c.y - m1);
    var /= total_w;

    const double theta_lo = std::log(kV1Min), theta_hi = std::log(kV1Max);
    auto clip = [&](double& theta, double& v2) {
        theta = std::clamp(theta, theta_lo, theta_hi);
        v2 = fix_v2_zero ? 0.0 : std::clamp(v2, 0.0, kV2Max);
    };

    if (fix_v2_zero) {
        // Exponential family: closed-form MLE.
        double theta = std::log(0.5 * m1), v2 = 0.0;
        clip(theta, v2);
        out.params.v1 = std::exp(theta);
        out.params.v2 = 0.0;
        out.objective = ce_objective(samples, weights, out.params.v1, 0.0);
        return out;
    }

    // Start from the better of the current point and the moment match
    // (E = v1 (2 + v2), Var = 4 v1^2 (1 + v2)).
    double theta = std::log(std::clamp(current.v1, kV1Min, kV1Max));
    double v2 = std::clamp(current.v2, 0.0, kV2Max);
    double best = mean_loglik(coords, total_w, theta, v2);
    {
        const double disc = m1 * m1 - var;
        double mv1 = 0.5 * m1, mv2 = 0.0;
        if (disc > 0.0) {
            mv1 = 0.5 * (m1 - std::sqrt(disc));
            mv2 = m1 / mv1 - 2.0;
        }
        double mt = std::log(mv1);
        clip(mt, mv2);
        const double j = mean_loglik(coords, total_w, mt, mv2);
        if (!(best >= j)) {
            theta = mt;
            v2 = mv2;
            best = j;
        }
    }

    for (int iter = 0; iter < 200; ++iter) {
        const Derivs d = mean_loglik_derivs(coords, total_w, theta, v2);
        double dt, dv;
        const double det = d.h_tt * d.h_vv - d.h_tv * d.h_tv;
        const bool at_bound = v2 <= 0.0 && d.g_v2 <= 0.0;
        if (at_bound) {
            // Only theta is free on the boundary.
            dv = 0.0;
            dt = d.h_tt < 0.0 ? -d.g_theta / d.h_tt : d.g_theta;
        } else if (d.h_tt < 0.0 && det > 0.0) {
            dt = -(d.h_vv * d.g_theta - d.h_tv * d.g_v2) / det;
            dv = -(-d.h_tv * d.g_theta + d.h_tt * d.g_v2) / det;
        } else {
            dt = d.g_theta;
            dv = d.g_v2;
        }
        bool improved = false;
        double step = 1.0;
        double nt = theta, nv = v2, nj = best;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            nt = theta + step * dt;
            nv = v2 + step * dv;
            clip(nt, nv);
            nj = mean_loglik(coords, total_w, nt, nv);
            if (nj > best) {
                improved = true;
                break;
            }
        }
        if (!improved) break;
        const double gain = nj - best;
        theta = nt;
        v2 = nv;
        best = nj;
        if (gain <= 1e-12 * std::max(1.0, std::fabs(best))) break;
    }
    out.params.v1 = std::exp(theta);
    out.params.v2 = v2;
    out.objective = ce_objective(samples, weights, out.params.v1, out.params.v2);
    return out;
}

namespace {

// ln f(x; nominal) - ln f(x; v) summed over a vector with common mu.
double ce_log_lr(std::span<const double> x, double mu, double v1, double v2) {
    double s = 0.0;
    for (double y : x) s += (-y - mu * mu + log_i0_branch(mu, y)) - scaled_ncx2_logpdf(y, v1, v2);
    return s;
}

}  // namespace

CeEstimate estimate_ce(const ChannelConfig& config, std::uint64_t samples, std::uint64_t seed, const CeOptions& ce,
                       const RunOptions& opts) {
    require_samples(samples);
    require_branches(config);
    if (!config.identical_means()) throw std::invalid_argument("CE requires identical means on all branches");
    if (ce.pilot_samples < 100) throw std::invalid_argument("CE pilot sample size must be >= 100");
    if (!(ce.rho > 0.0 && ce.rho < 1.0)) throw std::invalid_argument("CE quantile rho must lie in (0, 1)");
    if (ce.max_iterations < 1) throw std::invalid_argument("CE iteration cap must be >= 1");

    const std::size_t M = config.branches();
    const std::size_t m = config.combined();
    const double gamma = config.threshold();
    const double mu = config.mu().front();

    CeEstimate out;
    EstimateResult& r = out.result;
    r = base_result(Method::ce, samples, seed);

    CEParams v{0.5, 2.0 * mu * mu, 0, std::numeric_limits<double>::infinity()};
    const std::size_t n_pilot = static_cast<std::size_t>(ce.pilot_samples);
    const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ce.rho * static_cast<double>(n_pilot))));
    SampleBlock block;
    block.dim = M;
    block.values.resize(n_pilot * M);
    block.log_lr.resize(n_pilot);
    std::vector<double> h(n_pilot), h_sorted(n_pilot), weights(n_pilot);
    bool reached = false;
    for (int t = 1; t <= ce.max_iterations && !reached; ++t) {
        Engine eng(RngStream{seed, kCe}, static_cast<std::uint64_t>(t), 0);
        std::array<double, kMaxBranches> scratch;
        for (std::size_t s = 0; s < n_pilot; ++s) {
            double* row = block.values.data() + s * M;
            for (std::size_t i = 0; i < M; ++i) row[i] = scratch[i] = scaled_ncx2_variate(v.v1, v.v2, eng);
            h[s] = gsc_statistic_inplace(std::span<double>(scratch.data(), M), m);
            block.log_lr[s] = ce_log_lr(std::span<const double>(row, M), mu, v.v1, v.v2);
        }
        std::copy(h.begin(), h.end(), h_sorted.begin());
        std::nth_element(h_sorted.begin(), h_sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), h_sorted.end());
        double level = h_sorted[k - 1];
        if (level <= gamma) {
            level = gamma;
            reached = true;
        }
        double max_lr = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < n_pilot; ++s) {
            if (h[s] <= level) max_lr = std::max(max_lr, block.log_lr[s]);
        }
        if (!std::isfinite(max_lr)) throw EstimationError("CE elite set empty");
        for (std::size_t s = 0; s < n_pilot; ++s) weights[s] = h[s] <= level ? std::exp(block.log_lr[s] - max_lr) : 0.0;
        const CeUpdate upd = ce_update(block, weights, v);
        if (upd.degenerate) r.warnings.push_back("CE update degenerate at iteration " + std::to_string(t));
        v = upd.params;
        v.iteration = t;
        v.gamma_t = level;
        out.trace.push_back(v);
        r.work_units += ce.pilot_samples;
    }
    if (!reached) throw EstimationError("CE failed to reach target threshold");

    const double v1 = v.v1, v2 = v.v2;
    const ChunkResult total = sample_in_chunks(samples, seed, kCe, 0, opts, r.wall_time_s,
                                               [&](Engine& eng, std::uint64_t count, ChunkResult& res) {
                                                   std::array<double, kMaxBranches> x;
                                                   std::array<double, kMaxBranches> scratch;
                                                   for (std::uint64_t s = 0; s < count; ++s) {
                                                       for (std::size_t i = 0; i < M; ++i) {
                                                           x[i] = scratch[i] = scaled_ncx2_variate(v1, v2, eng);
                                                       }
                                                       const bool hit =
                                                           gsc_statistic_inplace(std::span<double>(scratch.data(), M), m) <= gamma;
                                                       if (hit) {
                                                           ++res.hits;
                                                           res.acc.add(std::exp(
                                                               ce_log_lr(std::span<const double>(x.data(), M), mu, v1, v2)));
                                                       } else {
                                                           res.acc.add(0.0);
                                                       }
                                                   }
                                               });
    r.p_hat = total.acc.mean;
    r.var_hat = total.acc.variance();
    r.sample_var = r.var_hat;
    if (total.hits == 0) r.warnings.push_back("no outage event observed");
    return out;
}

// ---------------------------------------------------------------------- MLS

namespace {

// Maps gamma-process coordinates to branch powers, X = F^{-1}(1 - e^{-G}).
class GammaToBranch {
public:
    explicit GammaToBranch(const ChannelConfig& config) : config_(config) {
        const auto& mu = config.mu();
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const Ncx2Params params(2, 2.0 * mu[i] * mu[i]);
            log_mass_.push_back(ncx2_logcdf(2.0 * config.threshold(), params));
            if (i > 0 && mu[i] == mu[i - 1]) quantile_.push_back(quantile_.back());
            else quantile_.push_back(std::make_shared<const Ncx2LeftQuantile>(params, log_mass_.back()));
        }
    }

    /// Branch power for coordinate i, or +inf when it already exceeds gamma_th.
    double operator()(std::size_t i, double g) const {
        if (g <= 0.0) return 0.0;
        // 1 - e^{-g} rounds to 1 for g > ~37; the clamp costs < 1e-16 in probability.
        const double log_p = std::min(std::log(-std::expm1(-g)), -1e-16);
        if (log_p > log_mass_[i]) return std::numeric_limits<double>::infinity();
        return 0.5 * (*quantile_[i])(log_p);
    }

    /// Whether the vector of gamma coordinates lies in the outage region.
    bool outage(std::span<const double> g) const {
        std::array<double, kMaxBranches> x;
        const std::size_t M = g.size();
        for (std::size_t i = 0; i < M; ++i) {
            x[i] = (*this)(i, g[i]);
            if (std::isinf(x[i])) return false;
        }
        return gsc_statistic_inplace(std::span<double>(x.data(), M), config_.combined()) <= config_.threshold();
    }

private:
    const ChannelConfig& config_;
    std::vector<double> log_mass_;
    std::vector<std::shared_ptr<const Ncx2LeftQuantile>> quantile_;
};

std::vector<double> validated_levels(const std::vector<double>& given) {
    std::vector<double> levels{0.0};
    for (double t : given) {
        if (t == 0.0 && levels.size() == 1) continue;
        if (!(t > levels.back())) throw std::invalid_argument("MLS levels must be strictly increasing in (0, 1]");
        levels.push_back(t);
    }
    if (levels.size() < 2 || levels.back() != 1.0) throw std::invalid_argument("MLS levels must end at 1");
    return levels;
}

struct ReplicationResult {
    double estimate = 0.0;
    std::vector<double> fractions;
    std::uint64_t steps = 0;
    bool extinct = false;
};

}  // namespace

MlsPilot mls_pilot_levels(const ChannelConfig& config, std::uint64_t pilot_samples, double target_cond_prob,
                          std::uint64_t seed) {
    require_branches(config);
    if (!(target_cond_prob > 0.0 && target_cond_prob < 1.0)) {
        throw std::invalid_argument("MLS target conditional probability must lie in (0, 1)");
    }
    if (pilot_samples < 10) throw std::invalid_argument("MLS pilot needs at least 10 samples");
    const std::size_t M = config.branches();
    const std::size_t N = static_cast<std::size_t>(pilot_samples);
    const GammaToBranch to_branch(config);
    constexpr double kTol = 1e-3;

    MlsPilot out;
    out.schedule.levels = {0.0};
    std::vector<double> survivors(N * M, 0.0);  // all chains start at G = 0
    std::size_t n_surv = N;
    std::vector<std::size_t> picks(N);
    std::vector<double> uniforms(N * M);
    std::vector<double> next(N * M);
    std::vector<char> alive(N);
    double t = 0.0;

    for (int step = 0; step < 10000; ++step) {
        // Common random numbers for this step keep the survival fraction
        // monotone in the candidate level.
        Engine eng(RngStream{seed, kMlsPilot}, static_cast<std::uint64_t>(step), 0);
        for (std::size_t j = 0; j < N; ++j) {
            picks[j] = std::min(n_surv - 1, static_cast<std::size_t>(uniform_open01(eng) * static_cast<double>(n_surv)));
            for (std::size_t i = 0; i < M; ++i) uniforms[j * M + i] = uniform_open01(eng);
        }
        auto evaluate = [&](double t_next) {
            std::size_t count = 0;
            for (std::size_t j = 0; j < N; ++j) {
                const double* base = survivors.data() + picks[j] * M;
                double* g = next.data() + j * M;
                for (std::size_t i = 0; i < M; ++i) {
                    g[i] = base[i] + boost::math::gamma_p_inv(t_next - t, uniforms[j * M + i]);
                }
                alive[j] = to_branch.outage(std::span<const double>(g, M));
                count += alive[j];
            }
            out.work_units += N;
            return static_cast<double>(count) / static_cast<double>(N);
        };

        double t_next = 1.0;
        double frac = evaluate(1.0);
        if (frac < target_cond_prob) {
            double lo = t, hi = 1.0;
            while (hi - lo > kTol) {
                const double mid = 0.5 * (lo + hi);
                if (evaluate(mid) >= target_cond_prob) lo = mid; else hi = mid;
            }
            t_next = lo > t ? lo : hi;
            frac = evaluate(t_next);
        } else if (step == 0) {
            out.warnings.push_back("event not rare at the MLS target; single-level schedule");
        }
        out.schedule.levels.push_back(t_next);
        out.schedule.survivor_fractions.push_back(frac);
        if (t_next >= 1.0) break;

        std::size_t k = 0;
        for (std::size_t j = 0; j < N; ++j) {
            if (!alive[j]) continue;
            std::copy_n(next.data() + j * M, M, survivors.data() + k * M);
            ++k;
        }
        if (k == 0) throw EstimationError("MLS pilot lost every chain; increase the pilot sample size");
        n_surv = k;
        t = t_next;
    }
    if (out.schedule.levels.back() != 1.0) throw EstimationError("MLS pilot did not reach t = 1");
    out.schedule.per_level_samples = pilot_samples;
    return out;
}

MlsEstimate estimate_mls(const ChannelConfig& config, std::uint64_t seed, const MlsOptions& mls,
                         const RunOptions& opts) {
    require_branches(config);
    if (mls.per_level_samples < 10) throw std::invalid_argument("MLS needs at least 10 samples per level");
    if (mls.replications < 2) throw std::invalid_argument("MLS needs at least 2 replications");

    MlsEstimate out;
    EstimateResult& r = out.result;
    r.method = Method::mls;
    r.seed = seed;

    std::uint64_t pilot_work = 0;
    if (mls.levels && !mls.levels->empty()) {
        out.schedule.levels = validated_levels(*mls.levels);
    } else {
        MlsPilot pilot = mls_pilot_levels(config, mls.pilot_samples, mls.target_cond_prob, seed);
        out.schedule.levels = pilot.schedule.levels;
        pilot_work = pilot.work_units;
        for (auto& w : pilot.warnings) r.warnings.push_back(std::move(w));
    }
    const auto& levels = out.schedule.levels;
    const std::size_t L = levels.size() - 1;
    const std::size_t M = config.branches();
    const std::size_t s = static_cast<std::size_t>(mls.per_level_samples);
    out.schedule.per_level_samples = mls.per_level_samples;
    const GammaToBranch to_branch(config);

    // The pilot counts as setup: in work_units but not in wall time.
    Stopwatch clock;
    const auto reps = run_chunks<ReplicationResult>(
        static_cast<std::size_t>(mls.replications), opts.workers, [&](std::size_t rep) {
            Engine eng(RngStream{seed, kMls}, 0, rep);
            ReplicationResult res;
            std::vector<double> cur(s * M), nxt(s * M);
            std::vector<std::size_t> surv;
            surv.reserve(s);
            double estimate = 1.0;
            for (std::size_t l = 1; l <= L; ++l) {
                const double dt = levels[l] - levels[l - 1];
                std::vector<std::size_t> next_surv;
                next_surv.reserve(s);
                for (std::size_t j = 0; j < s; ++j) {
                    double* g = nxt.data() + j * M;
                    if (l == 1) {
                        std::fill_n(g, M, 0.0);
                    } else {
                        const std::size_t pick = surv[std::min(
                            surv.size() - 1, static_cast<std::size_t>(uniform_open01(eng) * static_cast<double>(surv.size())))];
                        std::copy_n(cur.data() + pick * M, M, g);
                    }
                    for (std::size_t i = 0; i < M; ++i) g[i] += gamma_increment(dt, eng);
                    if (to_branch.outage(std::span<const double>(g, M))) next_surv.push_back(j);
                }
                res.steps += s;
                const double frac = static_cast<double>(next_surv.size()) / static_cast<double>(s);
                res.fractions.push_back(frac);
                estimate *= frac;
                if (next_surv.empty()) {
                    res.extinct = true;
                    break;
                }
                std::swap(cur, nxt);
                surv = std::move(next_surv);
            }
            res.estimate = res.extinct ? 0.0 : estimate;
            return res;
        });
    r.wall_time_s = clock.seconds();

    MomentAccumulator acc;
    std::vector<double> frac_sum(L, 0.0);
    std::vector<std::uint64_t> frac_count(L, 0);
    std::uint64_t steps = 0;
    for (const auto& rep : reps) {
        acc.add(rep.estimate);
        out.replicate_estimates.push_back(rep.estimate);
        steps += rep.steps;
        out.zero_replications += rep.extinct;
        for (std::size_t l = 0; l < rep.fractions.size(); ++l) {
            frac_sum[l] += rep.fractions[l];
            ++frac_count[l];
        }
    }
    for (std::size_t l = 0; l < L; ++l) {
        out.schedule.survivor_fractions.push_back(frac_count[l] ? frac_sum[l] / static_cast<double>(frac_count[l]) : 0.0);
    }
    out.replications = mls.replications;
    const double per_rep_cost = static_cast<double>(s) * static_cast<double>(L);
    r.samples = static_cast<std::uint64_t>(per_rep_cost) * mls.replications;
    r.p_hat = acc.mean;
    // Per-unit-work variance: Var(p_hat) = var_hat / samples = V_rep / R.
    r.var_hat = acc.variance() * per_rep_cost;
    r.sample_var = r.var_hat;
    r.work_units = steps + pilot_work;
    if (out.zero_replications > 0) {
        r.warnings.push_back(std::to_string(out.zero_replications) + " replications had an empty level");
    }
    return out;
}

}  // namespace outage
