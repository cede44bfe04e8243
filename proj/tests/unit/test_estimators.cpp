#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "outage/estimators.hpp"
#include "outage/metrics.hpp"
#include "outage/specfun.hpp"

using namespace outage;

namespace {

double standard_error(const EstimateResult& r) { return std::sqrt(r.var_hat / static_cast<double>(r.samples)); }

// |a - b| within k combined standard errors, with a floor for zero-variance
// estimators.
void expect_agree(const EstimateResult& a, double b, double b_se, double k, const char* what) {
    const double se = std::hypot(standard_error(a), b_se);
    EXPECT_LE(std::fabs(a.p_hat - b), std::max(k * se, 1e-12 * b))
        << what << ": " << a.p_hat << " vs " << b << " (se " << se << ")";
}

MlsOptions quick_mls() {
    MlsOptions o;
    o.per_level_samples = 2000;
    o.replications = 20;
    o.pilot_samples = 2000;
    return o;
}

CeOptions quick_ce() {
    CeOptions o;
    o.pilot_samples = 20000;
    return o;
}

// Every estimator at one config, modest budgets.
std::vector<EstimateResult> run_all(const ChannelConfig& c, std::uint64_t S, std::uint64_t seed) {
    std::vector<EstimateResult> out;
    out.push_back(estimate_nmc(c, S, seed));
    out.push_back(estimate_uis(c, S, seed).result);
    out.push_back(estimate_pis(c, S, seed).result);
    out.push_back(estimate_et(c, S, seed).result);
    out.push_back(estimate_ce(c, S, seed, quick_ce()).result);
    out.push_back(estimate_mls(c, seed, quick_mls()).result);
    return out;
}

}  // namespace

// --------------------------------------------------------------------- NMC

TEST(Nmc, HugeThresholdIsCertain) {
    const auto r = estimate_nmc(ChannelConfig::identical(4, 2, 0.5, 1e6), 10000, 1);
    EXPECT_EQ(r.p_hat, 1.0);
    EXPECT_EQ(r.var_hat, 0.0);
}

TEST(Nmc, RayleighSelectionMatchesClosedForm) {
    const ChannelConfig c(1, {0.0, 0.0}, 1.0);
    const auto r = estimate_nmc(c, 10000000, 2);
    expect_agree(r, *closed_form_outage(c), 0.0, 4.0, "nmc");
    EXPECT_NEAR(r.var_hat, r.p_hat * (1.0 - r.p_hat), 1e-15);
    ASSERT_TRUE(r.sample_var);
    EXPECT_NEAR(*r.sample_var / r.var_hat, 1.0, 1e-6);
}

TEST(Nmc, RejectsZeroSamples) { EXPECT_THROW(estimate_nmc(ChannelConfig::identical(2, 1, 0.5, 1.0), 0, 1), std::invalid_argument); }

// --------------------------------------------------------------------- UIS

TEST(Uis, SingleBranchSelectionIsExact) {
    const auto c = ChannelConfig::identical(5, 1, 0.7, 0.4);
    const auto u = estimate_uis(c, 20000, 3);
    EXPECT_NEAR(u.result.p_hat, u.ell1, 1e-15 * u.ell1);
    EXPECT_NEAR(u.result.var_hat, 0.0, 1e-15 * u.ell1 * u.ell1);
    EXPECT_NEAR(u.ell1, *closed_form_outage(c), 1e-14 * u.ell1);
    EXPECT_NEAR(u.ell1, uis_selection_probability(c), 1e-15 * u.ell1);
}

TEST(Uis, AgreesWithNmcAtModerateRarity) {
    const ChannelConfig c(2, {0.0, 0.0, 0.0}, 0.5);
    const auto ref = estimate_nmc(c, 20000000, 4);
    const auto u = estimate_uis(c, 1000000, 5);
    expect_agree(u.result, ref.p_hat, standard_error(ref), 3.0, "uis");
}

TEST(Uis, EmpiricalVarianceMatchesClosedForm) {
    // p from a long, much more precise PIS run.
    const auto c = ChannelConfig::identical(8, 4, 0.5, 1.0);
    const double p = estimate_pis(c, 2000000, 6).result.p_hat;
    const auto u = estimate_uis(c, 1000000, 7);
    ASSERT_TRUE(u.result.sample_var);
    EXPECT_NEAR(*u.result.sample_var / (u.ell1 * p - p * p), 1.0, 0.10);
}

// --------------------------------------------------------------------- PIS

TEST(Pis, PartitionPlan) {
    const auto plan = make_partition_plan(ChannelConfig::identical(8, 3, 0.5, 1.0));
    ASSERT_EQ(plan.blocks.size(), 3u);
    EXPECT_EQ(plan.blocks[0].size, 3u);
    EXPECT_EQ(plan.blocks[2].start, 6u);
    EXPECT_EQ(plan.blocks[2].size, 2u);
    EXPECT_NEAR(plan.blocks[2].delta, std::sqrt(2 * 0.25), 1e-15);
    // l2 = F(2g; 6, 3 * 0.5)^2 * F(2g; 4, 2 * 0.5).
    const double expect = std::pow(ncx2_cdf(2.0, Ncx2Params(6, 1.5)), 2) * ncx2_cdf(2.0, Ncx2Params(4, 1.0));
    EXPECT_NEAR(plan.ell2, expect, 1e-14 * expect);
    EXPECT_THROW(make_partition_plan(ChannelConfig(2, {0.5, 0.6, 0.5, 0.5}, 1.0)), std::invalid_argument);
    // Means may differ between blocks.
    EXPECT_NO_THROW(make_partition_plan(ChannelConfig(2, {0.5, 0.5, 0.9, 0.9}, 1.0)));
}

TEST(Pis, SelectionProbabilityOrdering) {
    for (std::size_t M : {2u, 4u, 8u}) {
        for (std::size_t m = 1; m <= M; ++m) {
            for (double mu : {0.0, 0.5, 2.3}) {
                for (double g : {0.1, 1.0, 17.0}) {
                    const auto c = ChannelConfig::identical(M, m, mu, g);
                    EXPECT_LE(make_partition_plan(c).ell2, uis_selection_probability(c) * (1.0 + 1e-12));
                }
            }
        }
    }
}

TEST(Pis, EmpiricalVarianceMatchesClosedForm) {
    const auto c = ChannelConfig::identical(8, 4, 0.5, 1.0);
    const double p = estimate_ce(c, 2000000, 8).result.p_hat;
    const auto r = estimate_pis(c, 1000000, 9);
    ASSERT_TRUE(r.result.sample_var);
    EXPECT_NEAR(*r.result.sample_var / (r.plan.ell2 * p - p * p), 1.0, 0.05);
    EXPECT_EQ(r.rejection.violations, 0u);
    EXPECT_TRUE(r.result.warnings.empty());
}

TEST(Pis, VacuousTruncationAgreesWithNmc) {
    // The rejection bound is loose here (about 3e5 trials per block), so keep S small.
    const auto c = ChannelConfig::identical(4, 2, 0.5, 1e3);
    const auto r = estimate_pis(c, 100, 10);
    EXPECT_NEAR(r.result.p_hat, 1.0, 1e-12);
    EXPECT_EQ(estimate_nmc(c, 10000, 10).p_hat, 1.0);
}

TEST(Pis, MixedBlockMeans) {
    const ChannelConfig c(2, {0.3, 0.3, 1.2, 1.2}, 1.0);
    const auto ref = estimate_nmc(c, 10000000, 11);
    const auto r = estimate_pis(c, 400000, 12);
    expect_agree(r.result, ref.p_hat, standard_error(ref), 4.0, "pis mixed");
}

// ---------------------------------------------------------------------- ET

TEST(Et, LikelihoodRatioIdentity) {
    const ChannelConfig c(3, {0.2, 0.5, 1.5, 2.0, 0.0}, 0.8);
    const double rate = 5.0 / 0.8;
    Engine eng(RngStream{13, 0});
    for (int k = 0; k < 2000; ++k) {
        std::vector<double> x(5);
        double log_prop = 0.0, log_nominal = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            x[i] = exponential_variate(rate, eng);
            log_prop += std::log(rate) - rate * x[i];
            log_nominal += std::log(2.0) + ncx2_logpdf(2.0 * x[i], Ncx2Params(2, 2.0 * c.mu()[i] * c.mu()[i]));
        }
        const double lhs = et_log_likelihood_ratio(c, x) + log_prop;
        EXPECT_NEAR(std::exp(lhs - log_nominal), 1.0, 1e-10);
    }
}

TEST(Et, FullSumMatchesClosedForm) {
    const ChannelConfig c(2, {0.0, 0.0}, 0.5);
    const auto r = estimate_et(c, 1000000, 14);
    expect_agree(r.result, *closed_form_outage(c), 0.0, 3.0, "et");
}

TEST(Et, SmallSubsetHitRate) {
    const auto r = estimate_et(ChannelConfig::identical(8, 2, 0.5, 0.1), 200000, 15);
    EXPECT_NEAR(r.hit_rate, 0.96, 0.01);
}

// ---------------------------------------------------------------------- CE

TEST(CeUpdate, RecoversGeneratingParameters) {
    const double v1 = 0.3, v2 = 2.5;
    Engine eng(RngStream{16, 0});
    SampleBlock block;
    block.dim = 1;
    block.values = sample_scaled_ncx2(v1, v2, 1000000, eng);
    block.log_lr.assign(block.values.size(), 0.0);
    const std::vector<double> w(block.values.size(), 1.0);
    const auto upd = ce_update(block, w, CEParams{0.5, 0.5});
    EXPECT_NEAR(upd.params.v1 / v1, 1.0, 0.02);
    EXPECT_NEAR(upd.params.v2 / v2, 1.0, 0.02);
    EXPECT_FALSE(upd.degenerate);
}

TEST(CeUpdate, CentralCaseIsExponentialMle) {
    SampleBlock block;
    block.dim = 2;
    block.values = {0.8, 0.8, 0.8, 0.8, 0.8, 0.8};
    block.log_lr.assign(3, 0.0);
    const std::vector<double> w{1.0, 0.5, 2.0};
    const auto upd = ce_update(block, w, CEParams{0.5, 1.0}, true);
    EXPECT_NEAR(upd.params.v1, 0.4, 1e-12);
    EXPECT_EQ(upd.params.v2, 0.0);
}

TEST(CeUpdate, NeverDecreasesObjective) {
    Engine eng(RngStream{17, 0});
    for (int trial = 0; trial < 20; ++trial) {
        SampleBlock block;
        block.dim = 4;
        block.values = sample_scaled_ncx2(0.1 + 0.05 * trial, 0.2 * trial, 4000, eng);
        block.log_lr.assign(1000, 0.0);
        std::vector<double> w(1000);
        for (double& v : w) v = uniform_open01(eng) < 0.3 ? uniform_open01(eng) : 0.0;
        const CEParams start{0.5, 0.5};
        const auto upd = ce_update(block, w, start);
        EXPECT_GE(upd.objective, ce_objective(block, w, start.v1, start.v2) - 1e-9 * std::fabs(upd.objective));
        EXPECT_NEAR(upd.objective, ce_objective(block, w, upd.params.v1, upd.params.v2), 1e-9 * std::fabs(upd.objective));
        EXPECT_GE(upd.params.v2, 0.0);
        EXPECT_GT(upd.params.v1, 0.0);
    }
}

TEST(Ce, ThresholdsDecreaseStrictly) {
    const auto r = estimate_ce(ChannelConfig::identical(8, 4, 0.5, 1.0), 100000, 18, quick_ce());
    ASSERT_GE(r.trace.size(), 2u);
    for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LT(r.trace[t].gamma_t, r.trace[t - 1].gamma_t);
    EXPECT_EQ(r.trace.back().gamma_t, 1.0);
}

TEST(Ce, NonRareThresholdNeedsNoAdaptation) {
    const auto c = ChannelConfig::identical(4, 2, 0.5, 6.0);
    const auto r = estimate_ce(c, 400000, 19, quick_ce());
    ASSERT_EQ(r.trace.size(), 1u);  // the update at gamma_th itself
    const auto ref = estimate_nmc(c, 4000000, 20);
    expect_agree(r.result, ref.p_hat, standard_error(ref), 3.0, "ce");
}

TEST(Ce, RequiresIdenticalMeans) {
    EXPECT_THROW(estimate_ce(ChannelConfig(1, {0.5, 0.6}, 1.0), 1000, 1), std::invalid_argument);
}

// --------------------------------------------------------------------- MLS

TEST(MlsPilot, NonRareIsSingleLevel) {
    const auto pilot = mls_pilot_levels(ChannelConfig::identical(4, 2, 0.5, 1e3), 2000, 0.2, 21);
    EXPECT_EQ(pilot.schedule.levels, (std::vector<double>{0.0, 1.0}));
}

TEST(MlsPilot, LevelsIncreaseAndSurvivalHoldsUp) {
    const auto c = ChannelConfig::identical(8, 4, 0.5, 1.0);
    const auto pilot = mls_pilot_levels(c, 4000, 0.2, 22);
    const auto& t = pilot.schedule.levels;
    ASSERT_GE(t.size(), 3u);
    EXPECT_EQ(t.front(), 0.0);
    EXPECT_EQ(t.back(), 1.0);
    for (std::size_t i = 1; i < t.size(); ++i) EXPECT_GT(t[i], t[i - 1]);

    // Validation run on the produced schedule.
    MlsOptions o = quick_mls();
    o.levels = std::vector<double>(t.begin() + 1, t.end());
    const auto r = estimate_mls(c, 23, o);
    for (double f : r.schedule.survivor_fractions) EXPECT_GE(f, 0.1);
}

TEST(Mls, SingleLevelIsNaiveSampling) {
    const ChannelConfig c(2, {0.5, 0.5, 0.5}, 1.0);
    MlsOptions o = quick_mls();
    o.levels = std::vector<double>{1.0};
    const auto r = estimate_mls(c, 24, o);
    const auto ref = estimate_nmc(c, 4000000, 25);
    expect_agree(r.result, ref.p_hat, standard_error(ref), 4.0, "mls single level");
}

TEST(Mls, RayleighSelectionMatchesClosedForm) {
    const ChannelConfig c(1, {0.0, 0.0}, 1.0);
    const auto r = estimate_mls(c, 26, quick_mls());
    expect_agree(r.result, *closed_form_outage(c), 0.0, 3.0, "mls");
}

TEST(Mls, TelescopesToOneWithoutConditioning) {
    MlsOptions o = quick_mls();
    o.levels = std::vector<double>{0.25, 0.5, 1.0};
    const auto r = estimate_mls(ChannelConfig::identical(4, 2, 0.5, 1e6), 27, o);
    EXPECT_EQ(r.result.p_hat, 1.0);
    EXPECT_EQ(r.zero_replications, 0u);
}

TEST(Mls, WorkAccounting) {
    MlsOptions o = quick_mls();
    o.levels = std::vector<double>{0.5, 1.0};
    const auto r = estimate_mls(ChannelConfig::identical(4, 2, 0.5, 0.5), 28, o);
    EXPECT_EQ(r.result.samples, 2000u * 2u * 20u);
    EXPECT_LE(r.result.work_units, r.result.samples);
    EXPECT_EQ(r.replicate_estimates.size(), 20u);
    // Per-unit-work variance: var_hat / samples equals the variance of the mean.
    const double mean =
        std::accumulate(r.replicate_estimates.begin(), r.replicate_estimates.end(), 0.0) / 20.0;
    double ss = 0.0;
    for (double v : r.replicate_estimates) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(r.result.var_hat / static_cast<double>(r.result.samples), ss / 19.0 / 20.0, 1e-12 * ss);
    EXPECT_THROW(estimate_mls(ChannelConfig::identical(4, 2, 0.5, 0.5), 1, MlsOptions{5, 20}), std::invalid_argument);
    EXPECT_THROW(estimate_mls(ChannelConfig::identical(4, 2, 0.5, 0.5), 1, MlsOptions{100, 1}), std::invalid_argument);
}

// ---------------------------------------------------------- cross-method

TEST(AllMethods, ClosedFormEdges) {
    for (const auto& c : {ChannelConfig::identical(4, 1, 0.5, 0.3), ChannelConfig::identical(4, 4, 0.5, 0.6)}) {
        const double exact = *closed_form_outage(c);
        for (const auto& r : run_all(c, 400000, 29)) expect_agree(r, exact, 0.0, 4.0, method_name(r.method).c_str());
    }
}

TEST(AllMethods, SmallInstanceAgreesWithNmcReference) {
    const auto c = ChannelConfig::identical(3, 2, 0.5, 0.3);
    const auto ref = estimate_nmc(c, 20000000, 30);
    EXPECT_GT(ref.p_hat, 1e-3);
    EXPECT_LT(ref.p_hat, 3e-2);
    for (const auto& r : run_all(c, 400000, 31)) {
        expect_agree(r, ref.p_hat, standard_error(ref), 4.0, method_name(r.method).c_str());
    }
}

TEST(AllMethods, ScvOrderingOfSelectionSamplers) {
    const auto c = ChannelConfig::identical(6, 3, 0.5, 0.5);
    const auto nmc = estimate_nmc(c, 2000000, 32);
    const auto uis = estimate_uis(c, 1000000, 33);
    const auto pis = estimate_pis(c, 1000000, 34);
    // NMC and UIS SCV follow from p_hat alone; compare at the common p.
    const double p = pis.result.p_hat;
    EXPECT_GT(1.0 / p - 1.0, uis.ell1 / p - 1.0);
    EXPECT_GT(uis.ell1 / p - 1.0, pis.plan.ell2 / p - 1.0);
    EXPECT_GT(scv(nmc), scv(uis.result));
    EXPECT_GT(scv(uis.result), scv(pis.result));
}

TEST(AllMethods, WorkerCountDoesNotChangeResults) {
    const auto c = ChannelConfig::identical(8, 4, 0.5, 1.0);
    RunOptions one, four;
    four.workers = 4;
    const std::uint64_t S = 50000;
    auto same = [](const EstimateResult& a, const EstimateResult& b) {
        EXPECT_EQ(a.p_hat, b.p_hat) << method_name(a.method);
        EXPECT_EQ(a.var_hat, b.var_hat) << method_name(a.method);
    };
    same(estimate_nmc(c, S, 35, one), estimate_nmc(c, S, 35, four));
    same(estimate_uis(c, S, 35, one).result, estimate_uis(c, S, 35, four).result);
    same(estimate_pis(c, S, 35, one).result, estimate_pis(c, S, 35, four).result);
    same(estimate_et(c, S, 35, one).result, estimate_et(c, S, 35, four).result);
    same(estimate_ce(c, S, 35, quick_ce(), one).result, estimate_ce(c, S, 35, quick_ce(), four).result);
    same(estimate_mls(c, 35, quick_mls(), one).result, estimate_mls(c, 35, quick_mls(), four).result);
}
